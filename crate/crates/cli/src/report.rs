//! Report schema and rendering.
//!
//! A report is a list of named estimates, each carrying its closed-form
//! target both symbolically and as a decimal evaluated at run time (never a
//! hard-coded decimal), plus the configuration that produced it. The pass
//! rule is uniform across every row: `pass = |value − target| ≤ tol`
//! whenever both a target and a tolerance are present. Window checks
//! ("value must land in [lo, hi]") are encoded in the same rule through a
//! companion `*_window_excess` row whose value is the distance outside the
//! window — zero exactly when the reading is inside.
//!
//! The embedded `config` map records the parameters that determine the
//! numbers. Execution details — thread count, output paths, rendering
//! format — are deliberately excluded, so two runs that compute the same
//! thing serialize to the same report (the `elapsed_s` stopwatch field is
//! the one documented exception).

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

/// Bumped whenever a field is added, renamed, or re-interpreted.
pub const REPORT_VERSION: u32 = 1;

/// One estimator row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
    /// Decimal target, rendered to 9 significant digits from the symbolic
    /// form at run time.
    pub target: Option<f64>,
    pub target_symbolic: Option<String>,
    pub tol: Option<f64>,
    pub pass: Option<bool>,
}

/// A full experiment report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub estimates: Vec<Estimate>,
    pub seed: u64,
    pub elapsed_s: f64,
}

impl Report {
    /// True when no row failed its check (informational rows don't count).
    pub fn all_pass(&self) -> bool {
        self.estimates.iter().all(|e| e.pass != Some(false))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// CSV rendering: a `#`-prefixed prologue with the report metadata and
    /// the config map, then the estimate table.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# version={} experiment={} seed={} elapsed_s={}\n",
            self.version, self.experiment, self.seed, self.elapsed_s
        ));
        for (k, v) in &self.config {
            out.push_str(&format!("# config {k}={v}\n"));
        }
        out.push_str("name,value,stderr,target,target_symbolic,tol,pass\n");
        for e in &self.estimates {
            let opt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.name,
                e.value,
                opt(&e.stderr),
                opt(&e.target),
                e.target_symbolic.clone().unwrap_or_default(),
                opt(&e.tol),
                e.pass.map(|p| p.to_string()).unwrap_or_default(),
            ));
        }
        out
    }

    pub fn write_rendered(&self, mut out: impl Write, csv: bool) -> io::Result<()> {
        out.write_all(if csv { self.to_csv() } else { self.to_json() }.as_bytes())
    }
}

/// A closed-form target: the formula as text and its value, evaluated from
/// the formula at run time.
#[derive(Debug, Clone)]
pub struct Target {
    pub symbolic: String,
    pub value: f64,
}

impl Target {
    pub fn new(symbolic: impl Into<String>, value: f64) -> Target {
        Target {
            symbolic: symbolic.into(),
            value,
        }
    }
}

/// Rounds to `digits` significant decimal digits (report rendering only;
/// pass checks use the full-precision value).
pub fn round_sig(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.prec$e}", prec = digits as usize - 1)
        .parse()
        .expect("f64 round-trips")
}

/// A row checked against a symmetric tolerance.
pub fn checked(
    name: impl Into<String>,
    value: f64,
    stderr: Option<f64>,
    target: Target,
    tol: f64,
) -> Estimate {
    Estimate {
        name: name.into(),
        value,
        stderr,
        pass: Some((value - target.value).abs() <= tol),
        target: Some(round_sig(target.value, 9)),
        target_symbolic: Some(target.symbolic),
        tol: Some(tol),
    }
}

/// An informational row: reported, never judged.
pub fn info(
    name: impl Into<String>,
    value: f64,
    stderr: Option<f64>,
    target: Option<Target>,
) -> Estimate {
    Estimate {
        name: name.into(),
        value,
        stderr,
        target: target.as_ref().map(|t| round_sig(t.value, 9)),
        target_symbolic: target.map(|t| t.symbolic),
        tol: None,
        pass: None,
    }
}

/// Distance of `value` outside the window `[lo, hi]` (zero inside), checked
/// to be exactly zero. Pairs with an informational row for the reading
/// itself when the window is not centered on the limiting constant.
pub fn window_excess(name_base: &str, value: f64, lo: f64, hi: f64) -> Estimate {
    let excess = (lo - value).max(value - hi).max(0.0);
    checked(
        format!("{name_base}_window_excess"),
        excess,
        None,
        Target::new(format!("0 (window [{lo}, {hi}])"), 0.0),
        0.0,
    )
}
