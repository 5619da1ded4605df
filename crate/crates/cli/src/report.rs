//! Metrics tables grouped into static and dynamic scenarios.

use std::fmt::Write as _;
use std::path::Path;

use gapnav::sim::log::{EpisodeLog, LogSource};
use gapnav::sim::metrics::{compute_metrics, EpisodeResult, Metrics};

use crate::Failure;

const GROUPS: [(&str, &[&str]); 2] = [
    ("Static scenarios (a,b,c,g)", &["a", "b", "c", "g"]),
    ("Dynamic scenarios (d,e,f,h)", &["d", "e", "f", "h"]),
];
const OTHER: &str = "Other scenarios";

#[derive(serde::Serialize)]
pub struct Row {
    pub group: String,
    /// Template name, or `all` for a group summary.
    pub label: String,
    pub metrics: Metrics,
}

#[derive(serde::Serialize)]
pub struct Table {
    pub rows: Vec<Row>,
}

fn group_of(template: &str) -> &'static str {
    GROUPS
        .iter()
        .find(|(_, members)| members.contains(&template))
        .map_or(OTHER, |(name, _)| name)
}

impl Table {
    pub fn build(results: &[EpisodeResult], t_max: f64) -> Result<Self, Failure> {
        if results.is_empty() {
            return Err(Failure::runtime("no episodes"));
        }
        let metrics = |rs: Vec<EpisodeResult>| compute_metrics(&rs, t_max).expect("nonempty");
        let mut rows = Vec::new();
        let order = GROUPS.iter().map(|g| g.0).chain([OTHER]);
        for group in order {
            let members: Vec<&EpisodeResult> =
                results.iter().filter(|r| group_of(&r.template) == group).collect();
            if members.is_empty() {
                continue;
            }
            let mut templates: Vec<&str> = members.iter().map(|r| r.template.as_str()).collect();
            templates.sort();
            templates.dedup();
            for t in &templates {
                let rs = members.iter().filter(|r| r.template == *t).map(|r| (*r).clone()).collect();
                rows.push(Row {
                    group: group.into(),
                    label: t.to_string(),
                    metrics: metrics(rs),
                });
            }
            rows.push(Row {
                group: group.into(),
                label: "all".into(),
                metrics: metrics(members.into_iter().cloned().collect()),
            });
        }
        Ok(Self { rows })
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("group,template,episodes,successes,success,time_success,stl,passes,behind\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let m = &r.metrics;
            writeln!(
                s,
                "\"{}\",{},{},{},{},{},{},{},{}",
                r.group,
                r.label,
                m.episodes,
                m.successes,
                m.success,
                opt(m.time_success),
                m.stl,
                m.passes,
                opt(m.behind)
            )
            .unwrap();
        }
        s
    }

    pub fn human(&self) -> String {
        let mut s = format!(
            "{:<12}{:>9}{:>9}{:>14}{:>9}{:>8}\n",
            "Scenario", "Episodes", "Success", "Time_success", "STL", "Behind"
        );
        let mut group = "";
        for r in &self.rows {
            if r.group != group {
                group = &r.group;
                writeln!(s, "{group}").unwrap();
            }
            let m = &r.metrics;
            let time = m.time_success.map_or("-".into(), |t| format!("{t:.2}s"));
            let behind = m.behind.map_or("-".into(), |b| format!("{:.1}%", 100.0 * b));
            writeln!(
                s,
                "  {:<10}{:>9}{:>9}{:>14}{:>9}{:>8}",
                r.label,
                m.episodes,
                format!("{:.1}%", 100.0 * m.success),
                time,
                format!("{:.2}s", m.stl),
                behind
            )
            .unwrap();
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<(), Failure> {
        let io = |e: std::io::Error| Failure::runtime(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("metrics.csv"), self.csv()).map_err(io)?;
        std::fs::write(dir.join("metrics.txt"), self.human()).map_err(io)?;
        let json = serde_json::to_string_pretty(self).expect("table serializes");
        std::fs::write(dir.join("metrics.json"), json).map_err(io)?;
        Ok(())
    }
}

/// Episode logs (not demos) directly inside `dir`, ordered by template and
/// seed. Also returns the logged timeout and the count of skipped lines.
pub fn load_logs(dir: &Path) -> Result<(Vec<EpisodeResult>, Option<f64>, usize), Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    let mut results = Vec::new();
    let mut timeout = None;
    let mut skipped = 0;
    for p in paths {
        let (log, bad) = match EpisodeLog::read(&p) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("warning: {}: {e}", p.display());
                skipped += 1;
                continue;
            }
        };
        skipped += bad;
        if log.header.source != LogSource::Episode {
            continue;
        }
        timeout.get_or_insert(log.header.config.reward.timeout);
        results.push(log.result());
    }
    if results.is_empty() {
        return Err(Failure::runtime(format!("no episodes in {}", dir.display())));
    }
    results.sort_by(|a, b| (&a.template, a.seed).cmp(&(&b.template, b.seed)));
    Ok((results, timeout, skipped))
}
