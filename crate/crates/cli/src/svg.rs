//! SVG frames of a recorded episode and time-series plots of per-tick counts.

use crate::report::SeriesRow;
use rtnua::engine::Snapshot;
use rtnua::steiner::NodeKind;
use rtnua::Vec2;
use std::collections::BTreeMap;
use std::fmt::Write;

const GREEN: &str = "#2e9e44";
const RED: &str = "#d33a2c";
const GRAY: &str = "#9a9a9a";
const PURPLE: &str = "#7b3fa0";
const TREE: &str = "#e08a1e";

/// World y points up; SVG y points down.
fn flip(p: Vec2) -> (f64, f64) {
    (p.x, -p.y)
}

/// One frame in world coordinates. `half_width` is the field half-width.
pub fn render_frame(snap: &Snapshot, half_width: f64) -> String {
    let pad = 0.15 * half_width + 1.0;
    let extent = half_width + pad;
    let unit = half_width / 40.0 + 0.05;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.3} {:.3} {:.3} {:.3}" width="640" height="640">"#,
        -extent,
        -extent,
        2.0 * extent,
        2.0 * extent
    );
    let _ = writeln!(s, r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="white"/>"#, -extent, -extent, 2.0 * extent, 2.0 * extent);
    let _ = writeln!(
        s,
        r#"<rect class="border" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="{GRAY}" stroke-width="{:.3}"/>"#,
        -half_width,
        -half_width,
        2.0 * half_width,
        2.0 * half_width,
        unit * 0.3
    );

    for &(a, b) in &snap.tree.edges {
        let (p, q) = (flip(snap.tree.nodes[a].position), flip(snap.tree.nodes[b].position));
        let _ = writeln!(
            s,
            r#"<line class="tree" x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="{TREE}" stroke-width="{:.3}" stroke-dasharray="{:.3}"/>"#,
            p.0,
            p.1,
            q.0,
            q.1,
            unit * 0.4,
            unit
        );
    }
    for n in snap.tree.nodes.iter().filter(|n| n.kind == NodeKind::Steiner) {
        let (x, y) = flip(n.position);
        let _ = writeln!(s, r#"<circle class="steiner" cx="{x:.4}" cy="{y:.4}" r="{:.3}" fill="none" stroke="{TREE}" stroke-width="{:.3}"/>"#, unit, unit * 0.3);
    }

    let position: BTreeMap<usize, Vec2> = snap.world.drones.iter().map(|d| (d.id, d.position)).collect();
    for &(a, b) in &snap.links {
        let (p, q) = (flip(position[&a]), flip(position[&b]));
        let _ = writeln!(
            s,
            r#"<line class="link" data-a="{a}" data-b="{b}" x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="{GREEN}" stroke-width="{:.3}"/>"#,
            p.0,
            p.1,
            q.0,
            q.1,
            unit * 0.2
        );
    }
    for &a in &snap.base_links {
        let p = flip(position[&a]);
        let _ = writeln!(
            s,
            r#"<line class="base-link" data-a="{a}" x1="0" y1="0" x2="{:.6}" y2="{:.6}" stroke="{GREEN}" stroke-width="{:.3}"/>"#,
            p.0,
            p.1,
            unit * 0.2
        );
    }

    let _ = writeln!(s, r#"<rect class="base" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{GREEN}"/>"#, -1.2 * unit, -1.2 * unit, 2.4 * unit, 2.4 * unit);
    for t in &snap.world.tasks {
        let (x, y) = flip(t.position);
        let (class, color) = if t.connected { ("task networked", PURPLE) } else { ("task", GRAY) };
        let _ = writeln!(s, r#"<rect class="{class}" x="{:.4}" y="{:.4}" width="{:.3}" height="{:.3}" fill="{color}"/>"#, x - unit, y - unit, 2.0 * unit, 2.0 * unit);
    }
    for d in &snap.world.drones {
        let (class, color) = if d.attrited {
            ("drone attrited", GRAY)
        } else if d.active {
            ("drone active", GREEN)
        } else {
            ("drone disconnected", RED)
        };
        let heading = if d.velocity.norm() > 1e-9 { d.velocity.y.atan2(d.velocity.x) } else { std::f64::consts::FRAC_PI_2 };
        let pts: Vec<String> = [0.0, 2.4, -2.4]
            .iter()
            .map(|off: &f64| {
                let a = heading + off;
                let r = if *off == 0.0 { 1.2 * unit } else { 0.8 * unit };
                let (x, y) = flip(d.position + Vec2::new(a.cos(), a.sin()) * r);
                format!("{x:.4},{y:.4}")
            })
            .collect();
        let _ = writeln!(s, r#"<polygon class="{class}" data-id="{}" points="{}" fill="{color}"/>"#, d.id, pts.join(" "));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="{:.3}" font-family="sans-serif">t = {}</text>"#,
        -half_width,
        -half_width - 0.3 * pad,
        2.0 * unit,
        snap.tick
    );
    s.push_str("</svg>\n");
    s
}

/// Per-tick means of the four counts over every episode in `rows`.
pub fn mean_series(rows: &[SeriesRow]) -> Vec<(u64, [f64; 4])> {
    let mut acc: BTreeMap<u64, ([f64; 4], usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(r.tick).or_insert(([0.0; 4], 0));
        for (k, v) in [r.alive, r.active, r.connected_tasks, r.retained_tasks].into_iter().enumerate() {
            e.0[k] += v as f64;
        }
        e.1 += 1;
    }
    acc.into_iter().map(|(t, (sum, n))| (t, sum.map(|v| v / n as f64))).collect()
}

/// Two panels: drone counts (alive, active) and task counts (connected, retained).
pub fn render_series(series: &[(u64, [f64; 4])], title: &str) -> String {
    const W: f64 = 420.0;
    const H: f64 = 280.0;
    const M: f64 = 40.0;
    let t_max = series.last().map(|s| s.0).unwrap_or(0).max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {} {}" width="{}" height="{}">"#, 2.0 * W, H + 30.0, 2.0 * W, H + 30.0);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, 2.0 * W, H + 30.0);
    let _ = writeln!(s, r#"<text x="{M}" y="18" font-size="14" font-family="sans-serif">{}</text>"#, escape(title));
    let panels = [
        ("Drones", [(0, "Alive Agents", GREEN), (1, "Alive Agents Active", "#1f5fa8")]),
        ("Tasks", [(2, "Connected Tasks", PURPLE), (3, "Connected Tasks (Ret)", TREE)]),
    ];
    for (pi, (label, curves)) in panels.iter().enumerate() {
        let x0 = pi as f64 * W + M;
        let (pw, ph, y0) = (W - 1.5 * M, H - 1.5 * M, 30.0);
        let y_max = series.iter().flat_map(|(_, v)| curves.iter().map(move |c| v[c.0])).fold(1.0f64, f64::max);
        let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{x0}" y="{}" font-size="11" font-family="sans-serif">{label} (max {:.1}) vs tick (0 to {t_max})</text>"#, y0 + ph + 16.0, y_max);
        for (ci, (k, name, color)) in curves.iter().enumerate() {
            let pts: Vec<String> = series
                .iter()
                .map(|(t, v)| format!("{:.2},{:.2}", x0 + pw * *t as f64 / t_max, y0 + ph * (1.0 - v[*k] / y_max)))
                .collect();
            let _ = writeln!(s, r#"<polyline class="series" data-name="{name}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
            let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" font-family="sans-serif" fill="{color}">{name}</text>"#, x0 + 8.0, y0 + 14.0 + 14.0 * ci as f64);
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
