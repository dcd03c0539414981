//! Drawable geometry: editor rectangles on the character grid and the scaled
//! overview model.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::activity::ActivityMap;
use crate::blockparse::{BlockId, BlockNode, BlockTree};
use crate::grammar::BlockKind;
use crate::source::SourceText;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    /// Scales every channel by `1 - fraction`, rounding to nearest.
    pub fn darken(self, fraction: f64) -> Rgb {
        let f = |c: u8| (c as f64 * (1.0 - fraction)).round().clamp(0.0, 255.0) as u8;
        Rgb(f(self.0), f(self.1), f(self.2))
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.0, self.1, self.2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PaletteError {
    #[error("invalid color {0:?}, expected #RRGGBB")]
    BadColor(String),
    #[error("fills must be distinct")]
    SameFills,
    #[error("outline darkening must lie strictly between 0 and 1")]
    BadDarken,
}

impl FromStr for Rgb {
    type Err = PaletteError;

    fn from_str(s: &str) -> Result<Rgb, PaletteError> {
        let bad = || PaletteError::BadColor(s.to_string());
        let hex = s.strip_prefix('#').filter(|h| h.len() == 6).ok_or_else(bad)?;
        let channel = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| bad());
        Ok(Rgb(channel(0)?, channel(2)?, channel(4)?))
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Palette {
    fills: [Rgb; 2],
    outline_darken: f64,
    inactive_fill: Rgb,
    error_color: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            fills: [Rgb(0xF5, 0xF5, 0xF5), Rgb(0xE8, 0xE8, 0xE8)],
            outline_darken: 0.12,
            inactive_fill: Rgb(0xD0, 0xD0, 0xD0),
            error_color: Rgb(0xCC, 0x00, 0x00),
        }
    }
}

impl Palette {
    pub fn new(fills: [Rgb; 2], outline_darken: f64, inactive_fill: Rgb, error_color: Rgb) -> Result<Palette, PaletteError> {
        if fills[0] == fills[1] {
            return Err(PaletteError::SameFills);
        }
        if !(outline_darken > 0.0 && outline_darken < 1.0) {
            return Err(PaletteError::BadDarken);
        }
        Ok(Palette {
            fills,
            outline_darken,
            inactive_fill,
            error_color,
        })
    }

    pub fn fills(&self) -> [Rgb; 2] {
        self.fills
    }

    pub fn outline_darken(&self) -> f64 {
        self.outline_darken
    }

    pub fn inactive_fill(&self) -> Rgb {
        self.inactive_fill
    }

    pub fn error_color(&self) -> Rgb {
        self.error_color
    }
}

/// Fill and outline for a block at `depth`: fills alternate by parity, the
/// outline is the fill darkened by the palette fraction.
pub fn shade_for_depth(palette: &Palette, depth: usize) -> (Rgb, Rgb) {
    let fill = palette.fills[depth % 2];
    (fill, fill.darken(palette.outline_darken))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockRect {
    pub block_id: BlockId,
    pub kind: BlockKind,
    pub top_line: usize,
    pub bottom_line: usize,
    pub left_col: usize,
    /// Exclusive.
    pub right_col: usize,
    pub depth: usize,
    pub fill: Rgb,
    pub outline: Rgb,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("E_MISMATCH: block {block_id} spans line {line}, but the source has {line_count} lines")]
pub struct MismatchError {
    pub block_id: BlockId,
    pub line: usize,
    pub line_count: usize,
}

pub fn editor_rects(tree: &BlockTree, source: &SourceText, palette: &Palette) -> Result<Vec<BlockRect>, MismatchError> {
    editor_rects_with_activity(tree, source, palette, None)
}

/// Like [`editor_rects`], but paints inactive conditional regions, and every block
/// inside one, with the inactive fill.
pub fn editor_rects_with_activity(
    tree: &BlockTree,
    source: &SourceText,
    palette: &Palette,
    activity: Option<&ActivityMap>,
) -> Result<Vec<BlockRect>, MismatchError> {
    let mut out = Vec::with_capacity(tree.len());
    for root in &tree.roots {
        push_rects(root, source, palette, activity, true, &mut out)?;
    }
    Ok(out)
}

fn push_rects(
    node: &BlockNode,
    source: &SourceText,
    palette: &Palette,
    activity: Option<&ActivityMap>,
    enclosing_active: bool,
    out: &mut Vec<BlockRect>,
) -> Result<(), MismatchError> {
    let line_count = source.line_count();
    for line in [node.first_line, node.last_line] {
        if line == 0 || line > line_count {
            return Err(MismatchError {
                block_id: node.id,
                line,
                line_count,
            });
        }
    }
    let lines = node.first_line..=node.last_line;
    let left_col = lines
        .clone()
        .filter_map(|l| source.indent_of(l))
        .min()
        .or_else(|| source.indent_of(node.open.line))
        .unwrap_or(0);
    let right_col = 1 + lines.filter_map(|l| source.line_len(l)).max().unwrap_or(0);
    let active = enclosing_active && activity.and_then(|a| a.get(node.id)).unwrap_or(true);
    let (fill, outline) = if active {
        shade_for_depth(palette, node.depth)
    } else {
        (palette.inactive_fill, palette.inactive_fill.darken(palette.outline_darken))
    };
    out.push(BlockRect {
        block_id: node.id,
        kind: node.kind,
        top_line: node.first_line,
        bottom_line: node.last_line,
        left_col,
        right_col,
        depth: node.depth,
        fill,
        outline,
        active,
    });
    for child in &node.children {
        push_rects(child, source, palette, activity, active, out)?;
    }
    Ok(())
}

/// Exact pixel quantity: character cells times a rational scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Px(pub Ratio<u64>);

impl Px {
    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl Serialize for Px {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverviewRect {
    pub block_id: BlockId,
    pub depth: usize,
    pub x: Px,
    pub y: Px,
    pub w: Px,
    pub h: Px,
    /// Character-grid extent after clipping to the zoom range.
    pub cols: usize,
    pub lines: usize,
    pub fill: Rgb,
    pub outline: Rgb,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorMark {
    pub line: usize,
    pub y: Px,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverviewModel {
    /// Pixels per character cell on both axes.
    pub scale: Px,
    pub view_width: u32,
    pub view_height: u32,
    pub doc_cols: usize,
    pub doc_lines: usize,
    pub from_line: usize,
    pub to_line: usize,
    pub granularity: usize,
    pub rects: Vec<OverviewRect>,
    pub error_lines: Vec<ErrorMark>,
    pub error_color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OverviewError {
    #[error("E_RANGE: zoom [{from}, {to}] is not within lines 1..={line_count}")]
    Zoom { from: usize, to: usize, line_count: usize },
    #[error("E_RANGE: view dimensions must be positive")]
    View,
    #[error(transparent)]
    Mismatch(#[from] MismatchError),
}

impl OverviewError {
    pub fn code(&self) -> &'static str {
        match self {
            OverviewError::Zoom { .. } | OverviewError::View => "E_RANGE",
            OverviewError::Mismatch(_) => "E_MISMATCH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverviewParams {
    pub view_width: u32,
    pub view_height: u32,
    pub granularity: usize,
    /// Inclusive line range; `None` shows the whole document.
    pub zoom: Option<(usize, usize)>,
}

/// Scales the editor geometry into a `view_width × view_height` window with one
/// uniform scale, keeping blocks of depth ≤ granularity that meet the zoom range.
pub fn overview_model(
    tree: &BlockTree,
    source: &SourceText,
    params: OverviewParams,
    palette: &Palette,
    activity: Option<&ActivityMap>,
) -> Result<OverviewModel, OverviewError> {
    let line_count = source.line_count();
    let (from, to) = params.zoom.unwrap_or((1, line_count));
    if from < 1 || from > to || to > line_count {
        return Err(OverviewError::Zoom {
            from,
            to,
            line_count,
        });
    }
    if params.view_width == 0 || params.view_height == 0 {
        return Err(OverviewError::View);
    }
    let included: Vec<BlockRect> = editor_rects_with_activity(tree, source, palette, activity)?
        .into_iter()
        .filter(|r| r.depth <= params.granularity && r.top_line <= to && r.bottom_line >= from)
        .collect();

    let widest_line = (from..=to).filter_map(|l| source.line_len(l)).max().unwrap_or(0);
    let widest_rect = included.iter().map(|r| r.right_col).max().unwrap_or(0);
    let doc_cols = widest_line.max(widest_rect).max(1);
    let doc_lines = to - from + 1;

    let by_width = Ratio::new(params.view_width as u64, doc_cols as u64);
    let by_height = Ratio::new(params.view_height as u64, doc_lines as u64);
    let scale = by_width.min(by_height);
    let px = |cells: usize| Px(scale * Ratio::from_integer(cells as u64));

    let rects = included
        .into_iter()
        .map(|r| {
            let top = r.top_line.max(from);
            let bottom = r.bottom_line.min(to);
            let cols = r.right_col - r.left_col;
            let lines = bottom - top + 1;
            OverviewRect {
                block_id: r.block_id,
                depth: r.depth,
                x: px(r.left_col),
                y: px(top - from),
                w: px(cols),
                h: px(lines),
                cols,
                lines,
                fill: r.fill,
                outline: r.outline,
                active: r.active,
            }
        })
        .collect();

    Ok(OverviewModel {
        scale: Px(scale),
        view_width: params.view_width,
        view_height: params.view_height,
        doc_cols,
        doc_lines,
        from_line: from,
        to_line: to,
        granularity: params.granularity,
        rects,
        error_lines: Vec::new(),
        error_color: palette.error_color,
    })
}

/// Adds a horizontal error mark for every line inside the zoom range.
pub fn mark_errors(mut model: OverviewModel, error_lines: &[usize]) -> OverviewModel {
    for &line in error_lines {
        let in_range = (model.from_line..=model.to_line).contains(&line);
        if !in_range || model.error_lines.iter().any(|m| m.line == line) {
            continue;
        }
        let y = Px(model.scale.0 * Ratio::from_integer((line - model.from_line) as u64));
        model.error_lines.push(ErrorMark { line, y });
    }
    model
}
