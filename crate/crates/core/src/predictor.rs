//! Which double-averaged observables a field and an initial state force to
//! vanish.
//!
//! The rules are necessary conditions only. When no rule fires both flags are
//! false, which permits a net dipole or current without requiring one.

use std::fmt;

use crate::classical::SymmetryClass;
use crate::field::FieldSymmetryReport;
use crate::harness::TransportEstimate;

/// Field symmetry label: `sym-a` half-period antisymmetry, `sym-b` even point,
/// `sym-c` odd point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSymmetry {
    HalfPeriod,
    EvenPoint,
    OddPoint,
}

impl FieldSymmetry {
    pub fn label(&self) -> &'static str {
        match self {
            Self::HalfPeriod => "sym-a",
            Self::EvenPoint => "sym-b",
            Self::OddPoint => "sym-c",
        }
    }
}

/// Initial-state label for a single symmetry class: `init-a` reflection,
/// `init-b` even in `p`, `init-c` even in `x`.
pub fn init_label(class: SymmetryClass) -> &'static str {
    match class {
        SymmetryClass::Reflection => "init-a",
        SymmetryClass::EvenInP => "init-b",
        SymmetryClass::EvenInX => "init-c",
        SymmetryClass::All => "init-abc",
    }
}

fn contains(init: SymmetryClass, class: SymmetryClass) -> bool {
    init == SymmetryClass::All || init == class
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportPrediction {
    pub momentum_must_vanish: bool,
    pub position_must_vanish: bool,
    /// Rules that fired, as (field symmetry, initial class) pairs.
    pub reasons: Vec<(FieldSymmetry, SymmetryClass)>,
}

impl TransportPrediction {
    pub fn any(&self) -> bool {
        self.momentum_must_vanish || self.position_must_vanish
    }
}

impl fmt::Display for TransportPrediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |b: bool| if b { "must vanish" } else { "free" };
        writeln!(f, "position: {}", flag(self.position_must_vanish))?;
        writeln!(f, "momentum: {}", flag(self.momentum_must_vanish))?;
        if self.reasons.is_empty() {
            write!(f, "rules fired: none")
        } else {
            let fired: Vec<String> = self
                .reasons
                .iter()
                .map(|(s, c)| format!("{} + {}", s.label(), init_label(*c)))
                .collect();
            write!(f, "rules fired: {}", fired.join(", "))
        }
    }
}

/// Applies the three rules. `SymmetryClass::All` stands for a state that is in
/// every class at once, such as an origin-centred Gaussian.
pub fn predict_transport(report: &FieldSymmetryReport, init: SymmetryClass) -> TransportPrediction {
    let mut pred = TransportPrediction {
        momentum_must_vanish: false,
        position_must_vanish: false,
        reasons: Vec::new(),
    };
    if report.half_period_antisymmetric && contains(init, SymmetryClass::Reflection) {
        pred.momentum_must_vanish = true;
        pred.position_must_vanish = true;
        pred.reasons.push((FieldSymmetry::HalfPeriod, SymmetryClass::Reflection));
    }
    if report.even_point.is_some() && contains(init, SymmetryClass::EvenInP) {
        pred.momentum_must_vanish = true;
        pred.reasons.push((FieldSymmetry::EvenPoint, SymmetryClass::EvenInP));
    }
    if report.odd_point.is_some() && contains(init, SymmetryClass::EvenInX) {
        pred.position_must_vanish = true;
        pred.reasons.push((FieldSymmetry::OddPoint, SymmetryClass::EvenInX));
    }
    pred
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Position,
    Momentum,
}

impl Observable {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Position => "mean_x",
            Self::Momentum => "mean_p",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Judgment {
    pub observable: Observable,
    pub estimate: f64,
    pub stderr: f64,
    /// `|estimate| / stderr`.
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    /// Observables that were predicted to vanish.
    pub judged: Vec<Judgment>,
    /// Observables that were free, reported with their `z` but never failed.
    pub unjudged: Vec<Judgment>,
    pub pass: bool,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in &self.judged {
            writeln!(
                f,
                "{}: {:+.6e} +/- {:.3e} (z = {:.2}) {}",
                j.observable.label(),
                j.estimate,
                j.stderr,
                j.z,
                if j.pass { "PASS" } else { "FAIL" }
            )?;
        }
        for j in &self.unjudged {
            writeln!(
                f,
                "{}: {:+.6e} +/- {:.3e} (z = {:.2}) not judged",
                j.observable.label(),
                j.estimate,
                j.stderr,
                j.z
            )?;
        }
        write!(f, "verdict: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// An observable flagged to vanish passes iff `|estimate| ≤ z_threshold · stderr`.
pub fn verify_prediction(pred: &TransportPrediction, est: &TransportEstimate, z_threshold: f64) -> Verdict {
    let mut judged = Vec::new();
    let mut unjudged = Vec::new();
    let entries = [
        (Observable::Position, pred.position_must_vanish, est.mean_x.mean, est.mean_x.stderr),
        (Observable::Momentum, pred.momentum_must_vanish, est.mean_p.mean, est.mean_p.stderr),
    ];
    for (observable, flagged, estimate, stderr) in entries {
        let z = if stderr > 0.0 {
            estimate.abs() / stderr
        } else if estimate == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let j = Judgment {
            observable,
            estimate,
            stderr,
            z,
            pass: estimate.abs() <= z_threshold * stderr,
        };
        if flagged {
            judged.push(j);
        } else {
            unjudged.push(j);
        }
    }
    let pass = judged.iter().all(|j| j.pass);
    Verdict { judged, unjudged, pass }
}
