// SPDX-License-Identifier: Apache-2.0

//! SVG 1.1 rendering of a layout export.
//!
//! The output depends on nothing but the export, and all coordinates are
//! printed with two decimals, so identical exports give identical bytes.

use std::fmt::Write;

use crate::edges::{EdgeKind, NODE_HALF_HEIGHT};
use crate::export::LayoutExport;

/// Pixels per grid unit.
const SCALE: f64 = 80.0;
const MARGIN: f64 = 0.75;
const NODE_HALF_WIDTH: f64 = 0.35;
const MAX_LABEL: usize = 18;

fn px(v: f64) -> String {
    format!("{:.2}", (v + MARGIN) * SCALE)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn short(label: &str) -> String {
    if label.chars().count() <= MAX_LABEL {
        label.to_string()
    } else {
        let mut s: String = label.chars().take(MAX_LABEL - 1).collect();
        s.push('…');
        s
    }
}

pub fn render_svg(export: &LayoutExport) -> String {
    let max_x = export
        .nodes
        .iter()
        .map(|n| n.x)
        .chain(export.edges.iter().filter_map(|e| e.control.map(|c| c[0])))
        .fold(0.0f64, f64::max);
    let max_y = export.nodes.iter().map(|n| n.y).fold(0.0f64, f64::max);
    let width = format!("{:.2}", (max_x + 2.0 * MARGIN) * SCALE);
    let height = format!("{:.2}", (max_y + 2.0 * MARGIN) * SCALE);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    s.push_str("<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#333333\"/></marker></defs>\n");
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>");

    s.push_str("<g class=\"edges\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\">\n");
    for e in &export.edges {
        let dash = if e.kind == EdgeKind::ForwardDown || e.kind == EdgeKind::Lateral {
            " stroke-dasharray=\"6 3\""
        } else {
            ""
        };
        let class = serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        match e.control {
            None => {
                let _ = writeln!(
                    s,
                    "<line class=\"edge {class}\" data-src=\"{}\" data-dst=\"{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"{dash} marker-end=\"url(#arrow)\"/>",
                    e.src, e.dst, px(e.from[0]), px(e.from[1]), px(e.to[0]), px(e.to[1])
                );
            }
            Some(c) => {
                let _ = writeln!(
                    s,
                    "<path class=\"edge {class}\" data-src=\"{}\" data-dst=\"{}\" d=\"M {} {} Q {} {} {} {}\"{dash} marker-end=\"url(#arrow)\"/>",
                    e.src, e.dst, px(e.from[0]), px(e.from[1]), px(c[0]), px(c[1]), px(e.to[0]), px(e.to[1])
                );
            }
        }
    }
    s.push_str("</g>\n");

    s.push_str("<g class=\"nodes\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">\n");
    let w = format!("{:.2}", 2.0 * NODE_HALF_WIDTH * SCALE);
    let h = format!("{:.2}", 2.0 * NODE_HALF_HEIGHT * SCALE);
    for n in &export.nodes {
        let stroke = if n.collapsed { " stroke-width=\"3\" stroke-dasharray=\"4 2\"" } else { " stroke-width=\"1\"" };
        let _ = writeln!(
            s,
            "<g class=\"node{}\" data-id=\"{}\" data-sfr=\"{}\"><rect x=\"{}\" y=\"{}\" width=\"{w}\" height=\"{h}\" rx=\"6\" fill=\"{}\" stroke=\"#222222\"{stroke}/><text x=\"{}\" y=\"{:.2}\">{}: {}</text></g>",
            if n.collapsed { " collapsed" } else { "" },
            n.id,
            n.sfr,
            px(n.x - NODE_HALF_WIDTH),
            px(n.y - NODE_HALF_HEIGHT),
            escape(&n.color),
            px(n.x),
            (n.y + MARGIN) * SCALE + 4.0,
            n.sfr,
            escape(&short(&n.label)),
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
