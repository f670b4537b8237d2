//! Diamond reports as JSON and as a text table.

use serde::Serialize;
use serde_json::{json, Value};

use crate::elaborator::Encoding;
use crate::kernel::DefEqConfig;

use super::{Diamond, DiamondReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReportSummary {
    pub total: usize,
    pub commuting: usize,
    /// Diamonds where the predictor disagrees with the oracle.
    pub mismatches: usize,
}

impl ReportSummary {
    pub fn of(reports: &[DiamondReport]) -> Self {
        ReportSummary {
            total: reports.len(),
            commuting: reports.iter().filter(|r| r.oracle.commutes()).count(),
            mismatches: reports.iter().filter(|r| !r.agrees()).count(),
        }
    }

    pub fn all_commute(&self) -> bool {
        self.commuting == self.total
    }
}

pub fn report_json(encoding: Encoding, config: DefEqConfig, reports: &[DiamondReport]) -> Value {
    let diamonds: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "source": r.diamond.source,
                "target": r.diamond.target,
                "pathA": Diamond::path_names(&r.diamond.path_a),
                "pathB": Diamond::path_names(&r.diamond.path_b),
                "oracle": r.oracle,
                "predictor": r.predictor,
            })
        })
        .collect();
    json!({
        "config": {
            "encoding": encoding,
            "eta_kernel": config.eta_kernel,
            "eta_unifier": config.eta_unifier,
        },
        "diamonds": diamonds,
        "summary": ReportSummary::of(reports),
    })
}

pub fn report_text(encoding: Encoding, config: DefEqConfig, reports: &[DiamondReport]) -> String {
    let onoff = |b: bool| if b { "on" } else { "off" };
    let mut rows: Vec<[String; 6]> = vec![[
        "source".into(),
        "target".into(),
        "path A".into(),
        "path B".into(),
        "oracle".into(),
        "predictor".into(),
    ]];
    for r in reports {
        rows.push([
            r.diamond.source.clone(),
            r.diamond.target.clone(),
            Diamond::path_names(&r.diamond.path_a).join(" ; "),
            Diamond::path_names(&r.diamond.path_b).join(" ; "),
            r.oracle.to_string(),
            r.predictor.to_string(),
        ]);
    }
    let mut widths = [0usize; 6];
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = format!(
        "encoding {encoding}, eta-kernel {}, eta-unifier {}\n",
        onoff(config.eta_kernel),
        onoff(config.eta_unifier)
    );
    for row in &rows {
        let cells: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    let s = ReportSummary::of(reports);
    out.push_str(&format!("{} / {} commuting, {} predictor mismatches\n", s.commuting, s.total, s.mismatches));
    out
}
