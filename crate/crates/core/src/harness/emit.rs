//! CSV, plot-data, and SVG emission for sweep records.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a CSV
//! row parses back to the exact record and identical sweeps produce
//! byte-identical files.

use crate::error::{Error, Result};
use crate::recovery::{RecoveryCondition, RecoveryStatus};

use super::sweep::TrialRecord;

/// Fixed column order of the trial CSV.
pub const CSV_HEADER: &str =
    "trial,N,d,gamma,delta,M,p,A1_size,S_size,variant,condition_holds,status,max_II,runtime_ms,seed";

fn csv_row(record: &TrialRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        record.trial,
        record.n,
        record.d,
        record.gamma,
        record.delta,
        record.m,
        record.p,
        record.a1_size,
        record.s_size,
        record.variant.as_str(),
        record.condition_holds,
        record.status.as_str(),
        record.max_ii,
        record.runtime_ms,
        record.seed,
    )
}

/// Render records as CSV with the fixed header.
pub fn write_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for record in records {
        out.push_str(&csv_row(record));
        out.push('\n');
    }
    out
}

/// Parse a CSV produced by [`write_csv`] back into records.
pub fn parse_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => {
            return Err(Error::InvalidParameter(format!(
                "unexpected CSV header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut records = Vec::new();
    for (number, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 15 {
            return Err(Error::InvalidParameter(format!(
                "row {} has {} fields, expected 15",
                number + 2,
                fields.len()
            )));
        }
        let parse_err = |what: &str| Error::InvalidParameter(format!("row {}: bad {what}", number + 2));
        records.push(TrialRecord {
            trial: fields[0].parse().map_err(|_| parse_err("trial"))?,
            n: fields[1].parse().map_err(|_| parse_err("N"))?,
            d: fields[2].parse().map_err(|_| parse_err("d"))?,
            gamma: fields[3].parse().map_err(|_| parse_err("gamma"))?,
            delta: fields[4].parse().map_err(|_| parse_err("delta"))?,
            m: fields[5].parse().map_err(|_| parse_err("M"))?,
            p: fields[6].parse().map_err(|_| parse_err("p"))?,
            a1_size: fields[7].parse().map_err(|_| parse_err("A1_size"))?,
            s_size: fields[8].parse().map_err(|_| parse_err("S_size"))?,
            variant: RecoveryCondition::parse(fields[9])?,
            condition_holds: fields[10].parse().map_err(|_| parse_err("condition_holds"))?,
            status: RecoveryStatus::parse(fields[11])?,
            max_ii: fields[12].parse().map_err(|_| parse_err("max_II"))?,
            runtime_ms: fields[13].parse().map_err(|_| parse_err("runtime_ms"))?,
            seed: fields[14].parse().map_err(|_| parse_err("seed"))?,
        });
    }
    Ok(records)
}

/// Per-erasure-size success curve plus theoretical erasure-size thresholds.
#[derive(Debug)]
pub struct PlotData {
    pub csv: String,
    pub svg: String,
}

pub const PLOT_HEADER: &str = "S_size,trials,recovered,success_rate,held,held_rate,\
threshold_comb_squared,threshold_dra_squared,threshold_dra_linear";

struct SizeGroup {
    s_size: usize,
    trials: usize,
    recovered: usize,
    held: usize,
    thresholds: [f64; 3],
}

/// The largest erasure size each condition admits for these inputs, from the
/// condition rearranged as a bound on `|S|`.
fn thresholds_for(record: &TrialRecord) -> Option<[f64; 3]> {
    if record.gamma == 0 || record.a1_size == 0 {
        return None;
    }
    let nd = (record.n as f64).powi(record.d as i32);
    let gamma = record.gamma as f64;
    let a1 = record.a1_size as f64;
    let ratio = record.delta / record.m;
    let pigeon = gamma * gamma + 2.0 * gamma;
    Some([
        nd / (4.0 * pigeon * a1) * ratio * ratio,
        nd / (4.0 * gamma * a1) * ratio * ratio,
        nd / (2.0 * gamma * a1) * ratio,
    ])
}

fn group_by_size(records: &[TrialRecord]) -> Vec<SizeGroup> {
    let mut sizes: Vec<usize> = records.iter().map(|r| r.s_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|s_size| {
            let rows: Vec<&TrialRecord> =
                records.iter().filter(|r| r.s_size == s_size).collect();
            let recovered =
                rows.iter().filter(|r| r.status == RecoveryStatus::Recovered).count();
            let held = rows.iter().filter(|r| r.condition_holds).count();
            let mut sums = [0.0f64; 3];
            let mut counted = 0usize;
            for row in &rows {
                if let Some(t) = thresholds_for(row) {
                    for (sum, value) in sums.iter_mut().zip(t) {
                        *sum += value;
                    }
                    counted += 1;
                }
            }
            let thresholds = if counted == 0 {
                [0.0; 3]
            } else {
                [sums[0] / counted as f64, sums[1] / counted as f64, sums[2] / counted as f64]
            };
            SizeGroup { s_size, trials: rows.len(), recovered, held, thresholds }
        })
        .collect()
}

/// Emit the per-size success-rate table and a minimal SVG line chart with
/// the thresholds overlaid as vertical lines.
pub fn emit_plot_data(records: &[TrialRecord]) -> PlotData {
    let groups = group_by_size(records);
    let mut csv = String::from(PLOT_HEADER);
    csv.push('\n');
    for g in &groups {
        let success = if g.trials == 0 { 0.0 } else { g.recovered as f64 / g.trials as f64 };
        let held_rate = if g.trials == 0 { 0.0 } else { g.held as f64 / g.trials as f64 };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            g.s_size,
            g.trials,
            g.recovered,
            success,
            g.held,
            held_rate,
            g.thresholds[0],
            g.thresholds[1],
            g.thresholds[2],
        ));
    }
    PlotData { svg: render_svg(&groups), csv }
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 420.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_B: f64 = 50.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_R: f64 = 20.0;

fn render_svg(groups: &[SizeGroup]) -> String {
    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;
    let x_max = groups
        .iter()
        .map(|g| g.s_size as f64)
        .chain(groups.iter().flat_map(|g| g.thresholds.iter().copied()))
        .fold(1.0f64, f64::max)
        .ceil();
    let x_of = |s: f64| MARGIN_L + s / x_max * plot_w;
    let y_of = |rate: f64| MARGIN_T + (1.0 - rate) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        SVG_H - MARGIN_B,
        SVG_W - MARGIN_R,
        SVG_H - MARGIN_B
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
        SVG_H - MARGIN_B
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">erasure size |S|</text>\n",
        MARGIN_L + plot_w / 2.0,
        SVG_H - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 16 {})\" \
         text-anchor=\"middle\">success rate</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    ));
    for tick in 0..=4 {
        let rate = tick as f64 / 4.0;
        let y = y_of(rate);
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{rate:.2}</text>\n",
            MARGIN_L - 6.0,
            y + 3.0
        ));
    }

    if !groups.is_empty() {
        let points: Vec<String> = groups
            .iter()
            .map(|g| {
                let rate = if g.trials == 0 { 0.0 } else { g.recovered as f64 / g.trials as f64 };
                format!("{},{}", x_of(g.s_size as f64), y_of(rate))
            })
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
            points.join(" ")
        ));
        for g in groups {
            let rate = if g.trials == 0 { 0.0 } else { g.recovered as f64 / g.trials as f64 };
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#1f77b4\"/>\n",
                x_of(g.s_size as f64),
                y_of(rate)
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                x_of(g.s_size as f64),
                SVG_H - MARGIN_B + 14.0,
                g.s_size
            ));
        }

        // Mean thresholds over all groups, one vertical line per variant.
        let labels = ["comb-squared", "dra-squared", "dra-linear"];
        let colors = ["#d62728", "#ff7f0e", "#2ca02c"];
        let mut means = [0.0f64; 3];
        for g in groups {
            for (mean, t) in means.iter_mut().zip(g.thresholds) {
                *mean += t;
            }
        }
        for mean in &mut means {
            *mean /= groups.len() as f64;
        }
        for ((label, color), threshold) in labels.iter().zip(colors).zip(means) {
            if threshold <= 0.0 || threshold > x_max {
                continue;
            }
            let x = x_of(threshold);
            svg.push_str(&format!(
                "<line x1=\"{x}\" y1=\"{MARGIN_T}\" x2=\"{x}\" y2=\"{}\" stroke=\"{color}\" \
                 stroke-dasharray=\"4 3\"/>\n",
                SVG_H - MARGIN_B
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"{color}\">{label}</text>\n",
                x + 3.0,
                MARGIN_T + 12.0
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(trial: usize, s_size: usize, recovered: bool) -> TrialRecord {
        TrialRecord {
            trial,
            n: 16,
            d: 1,
            gamma: 1,
            delta: 1.0,
            m: 1.0,
            p: 1.0,
            a1_size: 1,
            s_size,
            variant: RecoveryCondition::DraLinear,
            condition_holds: s_size < 8,
            status: if recovered { RecoveryStatus::Recovered } else { RecoveryStatus::Ambiguous },
            max_ii: 0.4375,
            runtime_ms: 0,
            seed: 99,
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let records = vec![record(0, 3, true), record(1, 9, false)];
        let text = write_csv(&records);
        let back = parse_csv(&text).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn empty_records_emit_header_only() {
        assert_eq!(write_csv(&[]), format!("{CSV_HEADER}\n"));
        let plot = emit_plot_data(&[]);
        assert_eq!(plot.csv, format!("{PLOT_HEADER}\n"));
        assert!(plot.svg.starts_with("<svg"));
    }

    #[test]
    fn one_record_emits_one_row() {
        let plot = emit_plot_data(&[record(0, 3, true)]);
        assert_eq!(plot.csv.lines().count(), 2);
    }

    #[test]
    fn linear_threshold_column_matches_formula() {
        // N^d / (2 gamma |A1|) * (delta / M) = 16 / 2 = 8 for the spike family.
        let plot = emit_plot_data(&[record(0, 3, true)]);
        let row = plot.csv.lines().nth(1).unwrap();
        let threshold: f64 = row.split(',').last().unwrap().parse().unwrap();
        assert_eq!(threshold, 8.0);
    }

    #[test]
    fn csv_rejects_malformed_rows() {
        assert!(parse_csv("nonsense\n").is_err());
        let text = format!("{CSV_HEADER}\n1,2,3\n");
        assert!(parse_csv(&text).is_err());
    }
}
