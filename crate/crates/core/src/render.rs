//! Renderers for block rectangles: SVG documents and 256-color terminal text.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::refactor::FoldSpan;
use crate::source::SourceText;
use crate::viewmodel::{BlockRect, OverviewModel};

pub const CELL_WIDTH: usize = 8;
pub const CELL_HEIGHT: usize = 16;
/// Extra px per nesting level between a box and the one it encloses.
pub const OUTSET_X: usize = 2;
pub const OUTSET_Y: usize = 1;

/// 256-color grayscale indices nearest to the default fills.
pub const ANSI_FILL_EVEN: u8 = 255;
pub const ANSI_FILL_ODD: u8 = 253;
pub const ANSI_FILL_INACTIVE: u8 = 250;
const ANSI_RESET: &str = "\x1b[0m";

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            // not representable in XML 1.0
            c if (c as u32) < 0x20 && c != '\t' => out.push('\u{FFFD}'),
            c => out.push(c),
        }
    }
    out
}

/// SVG of the source text over its block boxes. Folded lines are left out and
/// the placeholder is drawn at the end of the fold's opener line.
pub fn render_svg(rects: &[BlockRect], folds: &[FoldSpan], source: &SourceText) -> String {
    let hidden: BTreeSet<usize> = folds
        .iter()
        .flat_map(|f| f.hidden.0..=f.hidden.1)
        .collect();
    let visible_lines: Vec<usize> = (1..=source.line_count()).filter(|l| !hidden.contains(l)).collect();
    // display row of every visible line
    let row = |line: usize| visible_lines.partition_point(|&l| l < line);
    // a block opening on a hidden line lies inside a fold
    let shown: Vec<&BlockRect> = rects.iter().filter(|r| !hidden.contains(&r.top_line)).collect();
    let max_depth = shown.iter().map(|r| r.depth).max().unwrap_or(0);

    let text_cols = visible_lines
        .iter()
        .filter_map(|&l| source.line_len(l))
        .max()
        .unwrap_or(0)
        + 1
        + if folds.is_empty() { 0 } else { 4 };
    let width = text_cols * CELL_WIDTH + 2 * OUTSET_X * max_depth;
    let height = visible_lines.len() * CELL_HEIGHT + 2 * OUTSET_Y * max_depth;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="13">"#
    );
    for r in &shown {
        let level = max_depth - r.depth;
        let x = (r.left_col * CELL_WIDTH).saturating_sub(OUTSET_X * level);
        let w = (r.right_col - r.left_col) * CELL_WIDTH + 2 * OUTSET_X * level;
        let (top, bottom) = (row(r.top_line), row(r.bottom_line));
        let y = (top * CELL_HEIGHT).saturating_sub(OUTSET_Y * level);
        let h = (bottom - top + 1) * CELL_HEIGHT + 2 * OUTSET_Y * level;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="{}" stroke="{}" stroke-width="1" data-block="{}" data-depth="{}"/>"#,
            r.fill, r.outline, r.block_id, r.depth
        );
    }
    for (i, &line) in visible_lines.iter().enumerate() {
        let mut content = escape_xml(source.line(line).unwrap_or(""));
        if folds.iter().any(|f| f.placeholder_line == line) {
            content.push(' ');
            content.push_str(crate::refactor::FOLD_PLACEHOLDER);
        }
        let baseline = i * CELL_HEIGHT + 12;
        let _ = writeln!(
            svg,
            r#"<text x="0" y="{baseline}" xml:space="preserve">{content}</text>"#
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn ansi_index(rect: &BlockRect) -> u8 {
    if !rect.active {
        ANSI_FILL_INACTIVE
    } else if rect.depth.is_multiple_of(2) {
        ANSI_FILL_EVEN
    } else {
        ANSI_FILL_ODD
    }
}

/// Terminal rendering: each char gets the background of the deepest rect covering
/// it. Removing the escape codes gives back the source text unchanged.
pub fn render_ansi(rects: &[BlockRect], source: &SourceText) -> String {
    let text = source.as_str();
    let mut out = String::with_capacity(text.len() * 2);
    for line in 1..=source.line_count() {
        let covering: Vec<&BlockRect> = rects
            .iter()
            .filter(|r| r.top_line <= line && line <= r.bottom_line)
            .collect();
        let mut current: Option<u8> = None;
        for (col, c) in source.line(line).unwrap_or("").chars().enumerate() {
            let bg = covering
                .iter()
                .filter(|r| r.left_col <= col && col < r.right_col)
                .max_by_key(|r| r.depth)
                .map(|r| ansi_index(r));
            if bg != current {
                match bg {
                    Some(idx) => {
                        let _ = write!(out, "\x1b[48;5;{idx}m");
                    }
                    None => out.push_str(ANSI_RESET),
                }
                current = bg;
            }
            out.push(c);
        }
        out.push_str(ANSI_RESET);
        let at_end = line == source.line_count() && !text.ends_with('\n');
        if !at_end {
            out.push('\n');
        }
    }
    out
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// SVG of an overview model: scaled boxes plus one full-width line per error mark.
pub fn render_overview_svg(model: &OverviewModel) -> String {
    let (w, h) = (model.view_width, model.view_height);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    for r in &model.rects {
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="{}" stroke-width="0.5" data-block="{}"/>"#,
            num(r.x.to_f64()),
            num(r.y.to_f64()),
            num(r.w.to_f64()),
            num(r.h.to_f64()),
            r.fill,
            r.outline,
            r.block_id
        );
    }
    for mark in &model.error_lines {
        let y = num(mark.y.to_f64());
        let _ = writeln!(
            svg,
            r#"<line x1="0" y1="{y}" x2="{w}" y2="{y}" stroke="{}" stroke-width="1" data-line="{}"/>"#,
            model.error_color, mark.line
        );
    }
    svg.push_str("</svg>\n");
    svg
}
