//! The `brics` command line.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};


use brics_core::{
    block_at, conditional_activity, editor_rects_with_activity, extract_block, fold_spans, mark_errors,
    overview_model, render_ansi, render_overview_svg, render_svg, ActivityMap, GrammarSet, OverviewParams, Palette,
    Pos, Session, Snapshot,
};
use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DIAGNOSTICS: i32 = 2;
pub const EXIT_REFACTOR: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "brics", version, about = "Nested block boxes for source code")]
struct Cli {
    /// Directory of additional `<name>.grammar.json` files
    #[arg(long, global = true, value_name = "DIR")]
    grammars: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw the block boxes behind the source text
    Render {
        file: PathBuf,
        /// Grammar name; inferred from the file extension when omitted
        #[arg(long)]
        grammar: Option<String>,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fold blocks deeper than this depth (SVG only)
        #[arg(long, value_name = "G")]
        fold: Option<usize>,
        /// Comma-separated defined symbols; shades inactive conditional regions
        #[arg(long)]
        defines: Option<String>,
    },
    /// Scaled overview of the whole file or a line range
    Overview {
        file: PathBuf,
        #[arg(long)]
        grammar: Option<String>,
        #[arg(long)]
        width: u32,
        #[arg(long)]
        height: u32,
        #[arg(long)]
        granularity: usize,
        #[arg(long, requires = "to")]
        from: Option<usize>,
        #[arg(long, requires = "from")]
        to: Option<usize>,
        /// File with one 1-based error line number per line
        #[arg(long)]
        errors: Option<PathBuf>,
        /// Output path; `.svg` writes an SVG picture, anything else JSON
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        defines: Option<String>,
    },
    /// Move the block at a position into a new method
    Extract {
        file: PathBuf,
        #[arg(long)]
        grammar: Option<String>,
        /// Position inside the block as LINE:COL (1-based line, 0-based column)
        #[arg(long, value_parser = parse_pos)]
        block: Pos,
        #[arg(long)]
        name: String,
        /// Rewrite FILE in place instead of printing the result
        #[arg(long)]
        write: bool,
    },
    /// Grammar file utilities
    Grammar {
        #[command(subcommand)]
        action: GrammarAction,
    },
    /// Run the HTTP session service
    Serve {
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Subcommand, Debug)]
enum GrammarAction {
    /// Validate a grammar file
    Check { path: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Svg,
    Ansi,
}

fn parse_pos(s: &str) -> Result<Pos, String> {
    let (line, col) = s.split_once(':').ok_or("expected LINE:COL")?;
    let line: usize = line.parse().map_err(|_| format!("bad line {line:?}"))?;
    let col: usize = col.parse().map_err(|_| format!("bad column {col:?}"))?;
    if line == 0 {
        return Err("lines start at 1".into());
    }
    Ok(Pos::new(line, col))
}

/// A failure carrying its exit code; the message goes to the error stream.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type Outcome = Result<i32, Failure>;

/// Runs one invocation. `argv[0]` is the program name.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "brics: {}", f.message);
            f.code
        }
    }
}

fn grammar_set(dir: Option<&Path>) -> Result<GrammarSet, Failure> {
    let mut set = GrammarSet::builtin();
    if let Some(dir) = dir {
        let extra = GrammarSet::load_dir(dir).map_err(|e| usage(e.to_string()))?;
        for name in extra.names() {
            let g = extra.get(name).expect("listed grammar");
            set.insert((*g).clone());
        }
    }
    Ok(set)
}

fn open(set: &GrammarSet, file: &Path, grammar: Option<&str>) -> Result<Snapshot, Failure> {
    let bytes = std::fs::read(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let name = match grammar {
        Some(n) => n.to_string(),
        None => set
            .for_path(file)
            .map(|g| g.name.clone())
            .ok_or_else(|| usage(format!("{}: no grammar for this extension; pass --grammar", file.display())))?,
    };
    let session = Session::open_bytes(&bytes, &name, set).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    Ok((*session.snapshot()).clone())
}

/// Prints parse diagnostics and picks the success exit code.
fn report(snap: &Snapshot, file: &Path, stderr: &mut dyn Write) -> i32 {
    for d in &snap.diagnostics {
        let _ = writeln!(stderr, "{}:{d}", file.display());
    }
    if snap.diagnostics.is_empty() {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTICS
    }
}

fn activity(snap: &Snapshot, defines: Option<&str>) -> Option<ActivityMap> {
    defines.map(|d| {
        let defs: BTreeSet<String> = d.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
        conditional_activity(&snap.tree, &defs)
    })
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("stdout: {e}"))),
    }
}

fn read_error_lines(path: &Path) -> Result<Vec<usize>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| usage(format!("{}:{}: expected a line number, found {l:?}", path.display(), i + 1)))
        })
        .collect()
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let palette = Palette::default();
    match cli.command {
        Command::Render {
            file,
            grammar,
            format,
            out,
            fold,
            defines,
        } => {
            let set = grammar_set(cli.grammars.as_deref())?;
            let snap = open(&set, &file, grammar.as_deref())?;
            let act = activity(&snap, defines.as_deref());
            let rects = editor_rects_with_activity(&snap.tree, &snap.source, &palette, act.as_ref())
                .map_err(|e| usage(e.to_string()))?;
            let text = match format {
                Format::Svg => {
                    let folds = fold.map(|g| fold_spans(&snap.tree, g)).unwrap_or_default();
                    render_svg(&rects, &folds, &snap.source)
                }
                Format::Ansi => render_ansi(&rects, &snap.source),
            };
            emit(out.as_deref(), &text, stdout)?;
            Ok(report(&snap, &file, stderr))
        }
        Command::Overview {
            file,
            grammar,
            width,
            height,
            granularity,
            from,
            to,
            errors,
            out,
            defines,
        } => {
            let set = grammar_set(cli.grammars.as_deref())?;
            let snap = open(&set, &file, grammar.as_deref())?;
            let params = OverviewParams {
                view_width: width,
                view_height: height,
                granularity,
                zoom: from.zip(to),
            };
            let act = activity(&snap, defines.as_deref());
            let model = overview_model(&snap.tree, &snap.source, params, &palette, act.as_ref())
                .map_err(|e| usage(e.to_string()))?;
            let error_lines = match &errors {
                Some(path) => read_error_lines(path)?,
                None => Vec::new(),
            };
            let model = mark_errors(model, &error_lines);
            let is_svg = out.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg"));
            let text = if is_svg {
                render_overview_svg(&model)
            } else {
                serde_json::to_string_pretty(&model).expect("model serializes") + "\n"
            };
            emit(Some(&out), &text, stdout)?;
            Ok(report(&snap, &file, stderr))
        }
        Command::Extract {
            file,
            grammar,
            block,
            name,
            write,
        } => {
            let set = grammar_set(cli.grammars.as_deref())?;
            let grammar = match grammar {
                Some(g) => set.get(&g).map_err(|e| usage(e.to_string()))?,
                None => set
                    .for_path(&file)
                    .ok_or_else(|| usage(format!("{}: no grammar for this extension; pass --grammar", file.display())))?,
            };
            let snap = open(&set, &file, Some(&grammar.name))?;
            let refactor_failure = |message: String| Failure {
                code: EXIT_REFACTOR,
                message,
            };
            let id = block_at(&snap.tree, &snap.source, block)
                .map_err(|e| usage(e.to_string()))?
                .ok_or_else(|| refactor_failure(format!("E_NOT_FOUND: no block at {block}")))?;
            let result = extract_block(&snap.source, &grammar, &snap.tree, id, &name)
                .map_err(|e| refactor_failure(e.to_string()))?;
            if write {
                std::fs::write(&file, &result.new_source).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            } else {
                emit(None, &result.new_source, stdout)?;
            }
            Ok(report(&snap, &file, stderr))
        }
        Command::Grammar {
            action: GrammarAction::Check { path },
        } => {
            let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let (grammar, diags) = brics_core::check_grammar(&text);
            for d in &diags {
                let _ = writeln!(stderr, "{}: {d}", path.display());
            }
            match grammar {
                Some(g) => {
                    let _ = writeln!(stdout, "{}: ok ({})", path.display(), g.name);
                    Ok(EXIT_OK)
                }
                None => Err(usage(format!("{}: invalid grammar", path.display()))),
            }
        }
        Command::Serve { port, host } => {
            let set = grammar_set(cli.grammars.as_deref())?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| usage(e.to_string()))?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| usage(format!("{host}:{port}: {e}")))?;
                let addr = listener.local_addr().map_err(|e| usage(e.to_string()))?;
                let _ = writeln!(stderr, "listening on http://{addr}");
                let _ = stderr.flush();
                crate::server::serve(listener, crate::server::AppState::new(set))
                    .await
                    .map_err(|e| usage(e.to_string()))?;
                Ok(EXIT_OK)
            })
        }
    }
}

