use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use super::run::{mean, stderr, AccuracyReport, ReportRow};
use crate::error::{Error, Result};
use crate::sampling::{Approach, Technique};

pub const CSV_HEADER: &str = "network,approach,technique,characteristic,mu,run,lambda,flags";

/// One row per record, in report order. Undefined accuracies leave the
/// `lambda` field empty; flags are `;`-separated.
pub fn emit_csv<W: Write>(report: &AccuracyReport, mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in &report.rows {
        let lambda = r.lambda.map(|l| format!("{l:.6}")).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{:.6},{},{},{}",
            r.network,
            r.approach.name(),
            r.technique.name(),
            r.characteristic.name(),
            r.mu,
            r.run,
            lambda,
            r.flags.join(";")
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated series, one block per (network, approach,
/// technique, characteristic), blocks separated by two blank lines:
///
/// ```text
/// # network=random approach=DBS technique=BFS characteristic=seed
/// # mu mean stderr n
/// 0.100000 0.613201 0.010422 30
/// ```
///
/// `mean` and `stderr` cover defined accuracies only; `n` counts them. A
/// point with none defined prints `nan`.
pub fn emit_plot_data<W: Write>(report: &AccuracyReport, mut w: W) -> Result<()> {
    let series = report.rows.chunk_by(|a, b| {
        a.network == b.network
            && a.approach == b.approach
            && a.technique == b.technique
            && a.characteristic == b.characteristic
    });
    for (i, block) in series.enumerate() {
        if i > 0 {
            writeln!(w, "\n")?;
        }
        let r = &block[0];
        writeln!(
            w,
            "# network={} approach={} technique={} characteristic={}",
            r.network,
            r.approach.name(),
            r.technique.name(),
            r.characteristic.name()
        )?;
        writeln!(w, "# mu mean stderr n")?;
        for point in block.chunk_by(|a, b| a.mu == b.mu) {
            let values: Vec<f64> = point.iter().filter_map(|r| r.lambda).collect();
            let fmt = |v: Option<f64>| v.map_or_else(|| "nan".to_owned(), |v| format!("{v:.6}"));
            writeln!(
                w,
                "{:.6} {} {} {}",
                point[0].mu,
                fmt(mean(values.iter().copied())),
                fmt(stderr(&values)),
                values.len()
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sampling-rate ranges partitioning (0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MuRange {
    Low,
    Medium,
    High,
}

impl MuRange {
    pub const ALL: [MuRange; 3] = [MuRange::Low, MuRange::Medium, MuRange::High];

    pub fn of(mu: f64) -> Option<MuRange> {
        match mu {
            m if m > 0.0 && m <= 0.3 => Some(MuRange::Low),
            m if m > 0.3 && m <= 0.6 => Some(MuRange::Medium),
            m if m > 0.6 && m <= 1.0 => Some(MuRange::High),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MuRange::Low => "low",
            MuRange::Medium => "medium",
            MuRange::High => "high",
        }
    }

    /// Half-open bounds `(lo, hi]`.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            MuRange::Low => (0.0, 0.3),
            MuRange::Medium => (0.3, 0.6),
            MuRange::High => (0.6, 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RangeStats {
    pub range: MuRange,
    pub rows: usize,
    pub cell_means: Vec<(Approach, Technique, f64)>,
    pub approach_means: Vec<(Approach, f64)>,
    pub technique_means: Vec<(Technique, f64)>,
    pub dbs_minus_sbs: Option<f64>,
    pub rw_minus_bfs: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RangeSummary {
    /// Ranges that have rows, in increasing order.
    pub ranges: Vec<RangeStats>,
    /// Ranges without any row.
    pub omitted: Vec<MuRange>,
    /// Differences over every (network, characteristic, mu) cell.
    pub overall_dbs_minus_sbs: Option<f64>,
    pub overall_rw_minus_bfs: Option<f64>,
}

impl RangeSummary {
    pub fn range(&self, r: MuRange) -> Option<&RangeStats> {
        self.ranges.iter().find(|s| s.range == r)
    }
}

/// Group key: (network, approach, technique, characteristic, bucket).
type GroupKey<'a, B> = (&'a str, &'static str, &'static str, &'static str, B);

/// Mean accuracy of each group of rows sharing a key.
fn group_means<'a, B: Ord>(
    rows: impl Iterator<Item = &'a ReportRow>,
    bucket: impl Fn(&ReportRow) -> B,
) -> BTreeMap<GroupKey<'a, B>, f64> {
    let mut sums: BTreeMap<GroupKey<'a, B>, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let Some(l) = r.lambda else { continue };
        let key = (
            r.network.as_str(),
            r.approach.name(),
            r.technique.name(),
            r.characteristic.name(),
            bucket(r),
        );
        let e = sums.entry(key).or_default();
        e.0 += l;
        e.1 += 1;
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

fn mean_of<K>(groups: &BTreeMap<K, f64>, keep: impl Fn(&K) -> bool) -> Option<f64> {
    mean(groups.iter().filter(|(k, _)| keep(k)).map(|(_, &v)| v))
}

fn difference(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

/// Per-range means and differences. Each (network, approach, technique,
/// characteristic) group is averaged first, then groups are averaged with
/// equal weight, so every network counts the same regardless of size.
pub fn range_summary(report: &AccuracyReport) -> Result<RangeSummary> {
    if report.rows.is_empty() {
        return Err(Error::EmptyElementSet);
    }
    let by_range = group_means(report.rows.iter(), |r| MuRange::of(r.mu));
    let mut ranges = Vec::new();
    let mut omitted = Vec::new();
    for range in MuRange::ALL {
        let rows = report.rows.iter().filter(|r| MuRange::of(r.mu) == Some(range)).count();
        if rows == 0 {
            omitted.push(range);
            continue;
        }
        let in_range = |k: &GroupKey<Option<MuRange>>| k.4 == Some(range);
        let approach_mean = |a: Approach| mean_of(&by_range, |k| in_range(k) && k.1 == a.name());
        let technique_mean = |t: Technique| mean_of(&by_range, |k| in_range(k) && k.2 == t.name());
        let cell_means = Approach::ALL
            .into_iter()
            .flat_map(|a| Technique::ALL.into_iter().map(move |t| (a, t)))
            .filter_map(|(a, t)| {
                mean_of(&by_range, |k| in_range(k) && k.1 == a.name() && k.2 == t.name())
                    .map(|m| (a, t, m))
            })
            .collect();
        ranges.push(RangeStats {
            range,
            rows,
            cell_means,
            approach_means: Approach::ALL
                .into_iter()
                .filter_map(|a| approach_mean(a).map(|m| (a, m)))
                .collect(),
            technique_means: Technique::ALL
                .into_iter()
                .filter_map(|t| technique_mean(t).map(|m| (t, m)))
                .collect(),
            dbs_minus_sbs: difference(approach_mean(Approach::Dbs), approach_mean(Approach::Sbs)),
            rw_minus_bfs: difference(technique_mean(Technique::Rw), technique_mean(Technique::Bfs)),
        });
    }
    let by_cell = group_means(report.rows.iter(), |r| r.mu.to_bits());
    let overall = |pick: &dyn Fn(&GroupKey<u64>) -> bool| mean_of(&by_cell, pick);
    Ok(RangeSummary {
        ranges,
        omitted,
        overall_dbs_minus_sbs: difference(
            overall(&|k| k.1 == Approach::Dbs.name()),
            overall(&|k| k.1 == Approach::Sbs.name()),
        ),
        overall_rw_minus_bfs: difference(
            overall(&|k| k.2 == Technique::Rw.name()),
            overall(&|k| k.2 == Technique::Bfs.name()),
        ),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:+.6}"))
}

impl fmt::Display for RangeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "range\tmu\trows\tDBS-SBS\tRW-BFS\tcells")?;
        for s in &self.ranges {
            let (lo, hi) = s.range.bounds();
            let cells: Vec<String> = s
                .cell_means
                .iter()
                .map(|(a, t, m)| format!("{a}/{t}={m:.6}"))
                .collect();
            writeln!(
                f,
                "{}\t({lo}, {hi}]\t{}\t{}\t{}\t{}",
                s.range.name(),
                s.rows,
                opt(s.dbs_minus_sbs),
                opt(s.rw_minus_bfs),
                cells.join(" ")
            )?;
        }
        for r in &self.omitted {
            writeln!(f, "{}\tomitted: no rows", r.name())?;
        }
        writeln!(
            f,
            "overall\t\t\t{}\t{}",
            opt(self.overall_dbs_minus_sbs),
            opt(self.overall_rw_minus_bfs)
        )
    }
}
