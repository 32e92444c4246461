// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: batch rendering, analysis, fixtures and the
//! session server.

use std::fmt::Write as _;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use sfrviz_core::fixtures::{self, FixtureKind, FixtureSpec};
use sfrviz_core::session::SessionFile;
use sfrviz_core::svg::render_svg;
use sfrviz_core::{
    default_view, load_graph, loop_forest, number, render_view, sfr_number, is_reducible, LayoutExport, Traversal,
    ViewState,
};

#[derive(Parser)]
#[command(name = "sfrviz", version, about = "Canonical drawings and loop analysis for control-flow graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a graph to SVG and/or the layout export JSON.
    Render {
        graph: PathBuf,
        /// Write SVG here.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the layout export JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Take the grouping from a saved session file.
        #[arg(long)]
        view: Option<PathBuf>,
        /// Draw the input graph without the default grouping.
        #[arg(long, conflicts_with = "view")]
        raw: bool,
    },
    /// Print loop structure and reducibility.
    Analyze {
        graph: PathBuf,
        #[arg(long)]
        loops: bool,
    },
    /// Print the node numbering.
    Number {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "sfr")]
        mode: Mode,
    },
    /// Write a generated fixture graph.
    Fixture {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 3)]
        branches: usize,
        /// 1-based case indices that fall through to the next case.
        #[arg(long, value_delimiter = ',')]
        fallthrough: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Fragment repeated by `duplicated`.
        #[arg(long, value_enum, default_value = "if-else")]
        fragment: Kind,
        #[arg(long, default_value_t = 2)]
        copies: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Node count for `synthetic`.
        #[arg(long, default_value_t = 10_000)]
        nodes: usize,
        /// Edge count for `synthetic`.
        #[arg(long, default_value_t = 15_000)]
        edges: usize,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Run the session HTTP server.
    Serve {
        #[arg(long, env = "SFRVIZ_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sfr,
    Dfs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    IfElse,
    Switch,
    While,
    DoWhile,
    NestedLoops,
    Duplicated,
    Synthetic,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, data: &str) -> Result<()> {
    std::fs::write(path, data).with_context(|| format!("cannot write {}", path.display()))
}

fn fixture_kind(kind: Kind, branches: usize, fallthrough: &[usize], depth: usize) -> Result<FixtureKind> {
    Ok(match kind {
        Kind::IfElse => FixtureKind::IfElse,
        Kind::Switch => {
            let mut flags = vec![false; branches.saturating_sub(1)];
            for &i in fallthrough {
                if i == 0 || i > flags.len() {
                    bail!("fallthrough index {i} is outside 1..={}", flags.len());
                }
                flags[i - 1] = true;
            }
            FixtureKind::Switch { branches, fallthrough: flags }
        }
        Kind::While => FixtureKind::WhileLoop,
        Kind::DoWhile => FixtureKind::DoWhile,
        Kind::NestedLoops => FixtureKind::NestedLoops { depth },
        Kind::Duplicated | Kind::Synthetic => bail!("{} cannot be nested in another fixture", kind_name(kind)),
    })
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::IfElse => "if-else",
        Kind::Switch => "switch",
        Kind::While => "while",
        Kind::DoWhile => "do-while",
        Kind::NestedLoops => "nested-loops",
        Kind::Duplicated => "duplicated",
        Kind::Synthetic => "synthetic",
    }
}

fn fmt_set(ids: impl IntoIterator<Item = impl std::fmt::Display>) -> String {
    let items: Vec<String> = ids.into_iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn analyze(graph: &Path) -> Result<String> {
    let loaded = load_graph(&read(graph)?)?;
    let g = &loaded.graph;
    let t = sfr_number(g);
    let forest = loop_forest(g, &t);
    let mut out = String::new();
    writeln!(out, "{:<6} {:<8} {:<8} {:<6} body", "loop", "header", "parent", "level")?;
    for (i, l) in forest.loops.iter().enumerate() {
        let mut level = 1;
        let mut p = l.parent;
        while let Some(q) = p {
            level += 1;
            p = forest.loops[q].parent;
        }
        let parent = l.parent.map_or("-".to_string(), |p| p.to_string());
        writeln!(out, "{:<6} {:<8} {:<8} {:<6} {}", i, l.header.to_string(), parent, level, fmt_set(&l.body))?;
    }
    writeln!(out)?;
    writeln!(out, "{:<8} {:<6} {:<6} text", "node", "sfr", "depth")?;
    for (ix, n) in g.nodes().iter().enumerate() {
        let sfr = t.number_ix(ix).map_or("-".to_string(), |k| k.to_string());
        writeln!(out, "{:<8} {:<6} {:<6} {}", n.id.to_string(), sfr, forest.depth_ix(ix), n.instruction_text)?;
    }
    writeln!(out)?;
    writeln!(out, "max_depth={}", forest.max_depth)?;
    writeln!(out, "reducible={}", is_reducible(g, &forest))?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Render { graph, svg, json, view, raw } => {
            let loaded = load_graph(&read(&graph)?)?;
            let g = &loaded.graph;
            let state = match (view, raw) {
                (Some(path), _) => SessionFile::parse(&read(&path)?)?.view,
                (None, true) => ViewState::new(),
                (None, false) => default_view(g, &sfr_number(g)),
            };
            let rendered = render_view(g, &state)?;
            let export = LayoutExport::build(&rendered, 0, &loaded.warnings);
            if let Some(path) = &svg {
                write(path, &render_svg(&export))?;
            }
            if let Some(path) = &json {
                write(path, &export.to_json())?;
            }
            if svg.is_none() && json.is_none() {
                println!("{}", export.to_json());
            }
            for w in &loaded.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Analyze { graph, loops } => {
            if !loops {
                bail!("nothing to analyze; pass --loops");
            }
            print!("{}", analyze(&graph)?);
        }
        Command::Number { graph, mode } => {
            let loaded = load_graph(&read(&graph)?)?;
            let g = &loaded.graph;
            let t = number(g, match mode {
                Mode::Sfr => Traversal::Sfr,
                Mode::Dfs => Traversal::Dfs,
            });
            for &ix in t.order_ix() {
                println!("{} {}", g.node_at(ix).instruction_text, t.number_ix(ix).unwrap());
            }
            for id in g.unreachable_nodes() {
                eprintln!("warning: node {id} is unreachable from the root");
            }
        }
        Command::Fixture { kind, branches, fallthrough, depth, fragment, copies, seed, nodes, edges, output } => {
            let doc = match kind {
                Kind::Synthetic => fixtures::random::synthetic(seed, nodes, edges),
                Kind::Duplicated => {
                    let fragment = fixture_kind(fragment, branches, &fallthrough, depth)?;
                    let spec = FixtureSpec { kind: FixtureKind::Duplicated { fragment: Box::new(fragment), copies }, seed };
                    fixtures::generate_document(&spec)?
                }
                _ => {
                    let spec = FixtureSpec { kind: fixture_kind(kind, branches, &fallthrough, depth)?, seed };
                    fixtures::generate_document(&spec)?
                }
            };
            write(&output, &doc.to_json_pretty())?;
        }
        Command::Serve { port, host } => {
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{addr}");
            rt.block_on(sfrviz_core::server::serve(addr)).with_context(|| format!("server on {addr} failed"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
