//! Episode logs as JSON lines, and SVG trajectory plots.
//!
//! Every line is one tagged record: a `header` opens an episode, `tick`
//! records follow in order and a `summary` closes it.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engine::{EpisodeHeader, EpisodeLog, EpisodeSummary, TickRecord};
use crate::error::{NavError, Result};
use crate::geometry::Vec2;

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum LogLine {
    Header { episode: usize, header: EpisodeHeader },
    Tick { episode: usize, tick: TickRecord },
    Summary { episode: usize, summary: EpisodeSummary },
}

pub fn write_jsonl<W: Write>(logs: &[EpisodeLog], mut out: W) -> Result<()> {
    for (episode, log) in logs.iter().enumerate() {
        let mut line = |rec: &LogLine| -> Result<()> {
            serde_json::to_writer(&mut out, rec)?;
            out.write_all(b"\n")?;
            Ok(())
        };
        line(&LogLine::Header { episode, header: log.header.clone() })?;
        for t in &log.ticks {
            line(&LogLine::Tick { episode, tick: t.clone() })?;
        }
        line(&LogLine::Summary { episode, summary: log.summary.clone() })?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_jsonl(logs: &[EpisodeLog]) -> Result<String> {
    let mut buf = Vec::new();
    write_jsonl(logs, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Parses episode logs; errors carry the 1-based line number.
pub fn parse_jsonl(text: &str) -> Result<Vec<EpisodeLog>> {
    let mut logs = Vec::new();
    let mut open: Option<(usize, EpisodeHeader, Vec<TickRecord>)> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        last_line = line;
        let err = |message: String| NavError::Parse { line, message };
        let rec: LogLine = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
        match rec {
            LogLine::Header { episode, header } => {
                if open.is_some() {
                    return Err(err("header inside an unfinished episode".into()));
                }
                open = Some((episode, header, Vec::new()));
            }
            LogLine::Tick { episode, tick } => match &mut open {
                Some((ep, _, ticks)) if *ep == episode => ticks.push(tick),
                _ => return Err(err(format!("tick for episode {episode} outside its header/summary block"))),
            },
            LogLine::Summary { episode, summary } => match open.take() {
                Some((ep, header, ticks)) if ep == episode => logs.push(EpisodeLog { header, ticks, summary }),
                _ => return Err(err(format!("summary for episode {episode} without a matching header"))),
            },
        }
    }
    if let Some((episode, ..)) = open {
        return Err(NavError::Parse { line: last_line + 1, message: format!("episode {episode} is truncated (no summary)") });
    }
    if logs.is_empty() {
        return Err(NavError::EmptyInput("no episode records in log".into()));
    }
    Ok(logs)
}

const SVG_WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;

/// Blue at `t = 0` through red at `t = 1`.
fn time_color(t: f64) -> String {
    let hue = 240.0 * (1.0 - t.clamp(0.0, 1.0));
    format!("hsl({hue:.0},85%,45%)")
}

/// Draws walls, static obstacles, walker tracks labelled with their start and
/// end times, and the robot path coloured by time.
pub fn render_svg(log: &EpisodeLog) -> String {
    let h = &log.header;
    let scale = (SVG_WIDTH - 2.0 * MARGIN) / h.map_width_m.max(1e-9);
    let height = h.map_height_m * scale + 2.0 * MARGIN;
    let px = |p: Vec2| (MARGIN + p.x * scale, height - MARGIN - p.y * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH:.0}" height="{height:.0}" viewBox="0 0 {SVG_WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{SVG_WIDTH:.0}" height="{height:.0}" fill="#ffffff"/>"##);
    let (x0, y0) = px(Vec2::new(0.0, h.map_height_m));
    let _ = writeln!(
        s,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#999999"/>"##,
        h.map_width_m * scale,
        h.map_height_m * scale
    );
    for &[row, i0, i1] in &h.wall_runs {
        let (x, y) = px(Vec2::new(i0 as f64 * h.resolution, (row + 1) as f64 * h.resolution));
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#333333"/>"##,
            (i1 - i0) as f64 * h.resolution * scale,
            h.resolution * scale
        );
    }
    for o in &h.statics {
        let (x, y) = px(Vec2::new(o.x, o.y));
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="#777777"/>"##, o.radius * scale);
    }

    let dt = h.dt;
    for (k, radius) in h.walker_radius.iter().enumerate() {
        let track: Vec<Vec2> = h.walker_start.get(k).into_iter().chain(log.ticks.iter().filter_map(|t| t.walkers.get(k))).copied().collect();
        let (Some(&first), Some(&last)) = (track.first(), track.last()) else { continue };
        let pts: Vec<String> = track.iter().map(|&p| px(p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#e08a00" stroke-width="1.2" stroke-dasharray="3,2"/>"##, pts.join(" "));
        let (fx, fy) = px(first);
        let (lx, ly) = px(last);
        let _ = writeln!(s, r##"<circle cx="{lx:.2}" cy="{ly:.2}" r="{:.2}" fill="#e08a00"/>"##, radius * scale);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="10">{:.1}s</text>"#, fx + 4.0, fy - 4.0, 0.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="10">{:.1}s</text>"#, lx + 4.0, ly - 4.0, (track.len() - 1) as f64 * dt);
    }

    let path = log.trajectory();
    let total = path.len().saturating_sub(1).max(1) as f64;
    for (k, w) in path.windows(2).enumerate() {
        let (ax, ay) = px(w[0]);
        let (bx, by) = px(w[1]);
        let _ = writeln!(
            s,
            r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="{}" stroke-width="2.5" stroke-linecap="round"/>"#,
            time_color((k + 1) as f64 / total)
        );
    }
    let (sx, sy) = px(h.start);
    let _ = writeln!(s, r#"<circle class="start" cx="{sx:.2}" cy="{sy:.2}" r="4" fill="{}"/>"#, time_color(0.0));
    if let Some(&end) = path.last() {
        let (ex, ey) = px(end);
        let _ = writeln!(s, r##"<circle class="end" cx="{ex:.2}" cy="{ey:.2}" r="{:.2}" fill="none" stroke="#000000"/>"##, 0.3 * scale);
    }
    let (gx, gy) = px(h.goal);
    let _ = writeln!(s, r##"<rect class="goal" x="{:.2}" y="{:.2}" width="8" height="8" fill="#0a0"/>"##, gx - 4.0, gy - 4.0);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="14" font-size="12">{:?} after {:.1}s, path {:.2} m</text>"#,
        log.summary.termination, log.summary.duration, log.summary.path_length
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curriculum::stage_config;
    use crate::engine::{run_episode, EnvConfig};
    use crate::observation::AgentVariant;
    use crate::policy::{GoToGoal, ZeroPolicy};

    fn sample_logs() -> Vec<EpisodeLog> {
        let stage = stage_config(5).unwrap();
        let env = EnvConfig { max_ticks: 60, ..Default::default() };
        let policy = GoToGoal::new(env.limits);
        (0..2).map(|s| run_episode(&policy, &stage.scenario(), AgentVariant::Agent1, &env, s).unwrap()).collect()
    }

    #[test]
    fn jsonl_round_trip_is_exact() {
        let logs = sample_logs();
        let text = to_jsonl(&logs).unwrap();
        assert_eq!(parse_jsonl(&text).unwrap(), logs);
    }

    #[test]
    fn truncated_log_reports_line() {
        let text = to_jsonl(&sample_logs()[..1]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let mut cut = lines[..3].join("\n");
        cut.push('\n');
        cut.push_str(&lines[3][..lines[3].len() / 2]);
        match parse_jsonl(&cut) {
            Err(NavError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        let without_summary = lines[..lines.len() - 1].join("\n");
        assert!(matches!(parse_jsonl(&without_summary), Err(NavError::Parse { .. })));
    }

    #[test]
    fn empty_log_is_explicit_error() {
        assert!(matches!(parse_jsonl(""), Err(NavError::EmptyInput(_))));
        assert!(matches!(parse_jsonl("\n\n"), Err(NavError::EmptyInput(_))));
    }

    #[test]
    fn stationary_robot_plots_single_point() {
        let stage = stage_config(1).unwrap();
        let env = EnvConfig { max_ticks: 5, ..Default::default() };
        let log = run_episode(&ZeroPolicy, &stage.scenario(), AgentVariant::Agent2, &env, 0).unwrap();
        let svg = render_svg(&log);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"class="start""#));
        assert!(svg.contains("Timeout"));
    }

    #[test]
    fn walker_tracks_carry_time_labels() {
        let logs = sample_logs();
        let svg = render_svg(&logs[0]);
        assert!(svg.contains(">0.0s<"));
        assert!(svg.contains(&format!(">{:.1}s<", logs[0].ticks.len() as f64 * 0.1)));
    }
}
