use std::fmt::Write as _;

use super::{ReportError, SankeyDiagram};

const PALETTE: [&str; 20] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
];

/// Canvas geometry. Vertical space per asset is
/// `(height - 2 margin - header - (k_max - 1) node_gap) / N`, where `k_max`
/// is the largest cluster count over all columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub header: f64,
    pub node_width: f64,
    pub node_gap: f64,
    pub link_opacity: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            width: 960.0,
            height: 600.0,
            margin: 20.0,
            header: 20.0,
            node_width: 14.0,
            node_gap: 8.0,
            link_opacity: 0.45,
        }
    }
}

impl SvgStyle {
    pub fn unit_height(&self, diagram: &SankeyDiagram) -> f64 {
        let k_max = diagram.columns.iter().map(|c| c.nodes.len()).max().unwrap_or(1);
        let paddings = 2.0 * self.margin + self.header + (k_max as f64 - 1.0) * self.node_gap;
        (self.height - paddings) / diagram.n_assets as f64
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
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

/// Static SVG 1.1 rendering. Nodes are rectangles with height proportional
/// to cluster size; links are cubic Bezier strokes whose width is
/// proportional to the number of shared assets. Asset lists go into
/// `<title>` elements.
pub fn render_svg(diagram: &SankeyDiagram, style: &SvgStyle) -> Result<String, ReportError> {
    diagram.check_flow()?;
    let n_cols = diagram.columns.len();
    if n_cols < 2 {
        return Err(ReportError::TooFewPartitions(n_cols));
    }
    let unit = style.unit_height(diagram);
    if unit.is_nan() || unit <= 0.0 {
        return Err(ReportError::Invalid("canvas too small for the diagram".into()));
    }
    let top = style.margin + style.header;
    let step_x = (style.width - 2.0 * style.margin - style.node_width) / (n_cols - 1) as f64;
    let col_x = |c: usize| style.margin + c as f64 * step_x;

    // node top per column, indexed by cluster label
    let node_y: Vec<Vec<f64>> = diagram
        .columns
        .iter()
        .map(|col| {
            let mut ys = vec![0.0; col.nodes.len()];
            let mut y = top;
            for node in &col.nodes {
                ys[node.cluster] = y;
                y += node.size as f64 * unit + style.node_gap;
            }
            ys
        })
        .collect();
    let color = |c: usize, cluster: usize| PALETTE[diagram.columns[c].position(cluster) % PALETTE.len()];

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = style.width,
        h = style.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let _ = writeln!(out, r#"<g class="links" fill="none">"#);
    let mut out_offset: Vec<Vec<f64>> = node_y.iter().map(|ys| vec![0.0; ys.len()]).collect();
    let mut in_offset = out_offset.clone();
    for link in &diagram.links {
        let c = link.column;
        let w = link.weight as f64 * unit;
        let y0 = node_y[c][link.source] + out_offset[c][link.source] + w / 2.0;
        let y1 = node_y[c + 1][link.target] + in_offset[c + 1][link.target] + w / 2.0;
        out_offset[c][link.source] += w;
        in_offset[c + 1][link.target] += w;
        let x0 = col_x(c) + style.node_width;
        let x1 = col_x(c + 1);
        let xm = (x0 + x1) / 2.0;
        let _ = writeln!(
            out,
            r#"<path class="link" d="M{x0:.2},{y0:.2} C{xm:.2},{y0:.2} {xm:.2},{y1:.2} {x1:.2},{y1:.2}" stroke="{col}" stroke-opacity="{op}" stroke-width="{w:.3}" data-weight="{wt}"><title>{title}</title></path>"#,
            col = color(c, link.source),
            op = style.link_opacity,
            wt = link.weight,
            title = escape(&link.assets.join(", ")),
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g class="nodes" stroke="#333" stroke-width="0.5">"##);
    for (c, col) in diagram.columns.iter().enumerate() {
        for node in &col.nodes {
            let _ = writeln!(
                out,
                r#"<rect class="node" x="{x:.2}" y="{y:.2}" width="{nw:.2}" height="{h:.3}" fill="{fill}"><title>{title}</title></rect>"#,
                x = col_x(c),
                y = node_y[c][node.cluster],
                nw = style.node_width,
                h = node.size as f64 * unit,
                fill = color(c, node.cluster),
                title = escape(&format!("{} / cluster {} ({} assets)", col.label, node.cluster, node.size)),
            );
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g class="labels" font-family="sans-serif" font-size="12" fill="#222">"##);
    for (c, col) in diagram.columns.iter().enumerate() {
        let anchor = if c == 0 {
            "start"
        } else if c == n_cols - 1 {
            "end"
        } else {
            "middle"
        };
        let x = match anchor {
            "start" => col_x(c),
            "end" => col_x(c) + style.node_width,
            _ => col_x(c) + style.node_width / 2.0,
        };
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{label}</text>"#,
            y = style.margin + style.header * 0.6,
            label = escape(&col.label),
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}
