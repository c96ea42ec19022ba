//! Named oracle cases and bundled scenario templates.

use qflow::analytic::{
    case_box, case_delta_well, case_entangled_gaussian, case_hydrogen_1s, describe_case, OracleCase,
};
use qflow::UnitSystem;

pub struct CaseEntry {
    pub name: &'static str,
    pub build: fn(&UnitSystem) -> qflow::Result<OracleCase>,
    /// Closed forms behind the expectations.
    pub formulas: &'static str,
}

pub const CASES: [CaseEntry; 6] = [
    CaseEntry {
        name: "box",
        build: |u| case_box(1, 1.0, u),
        formulas: "Q_n = n^2 hbar^2 pi^2 / (2 m a^2) at every interior point, P_B = T0j = 0, E_B = Q_n",
    },
    CaseEntry {
        name: "box-n3",
        build: |u| case_box(3, 2.0, u),
        formulas: "Q_3 = 9 hbar^2 pi^2 / (8 m) away from the two interior nodes",
    },
    CaseEntry {
        name: "delta-well",
        build: |u| case_delta_well(1.0, u),
        formulas: "psi = sqrt(alpha) e^{-alpha |x|}, Re<P^2>_W / 2m = -hbar^2 alpha^2 / 2m outside 3 well widths",
    },
    CaseEntry {
        name: "hydrogen-1s",
        build: |u| case_hydrogen_1s(1.0, 1.0, u),
        formulas: "Q(r) = e^2/r + E on 0.5 a0 <= r <= 10 a0, Q + V = E = -mu e^4 / 2 hbar^2, grad Q + grad V = 0",
    },
    CaseEntry {
        name: "entangled-gaussian",
        build: |u| case_entangled_gaussian(0.3, 1.0, u),
        formulas: "psi ~ exp(-a(x1^2 + x2^2) - c x1 x2), a = 1/4 sigma^2: d2Q/dx1dx2 = -2 a c hbar^2 (1/m1 + 1/m2)",
    },
    CaseEntry {
        name: "product-gaussian",
        build: |u| case_entangled_gaussian(0.0, 1.0, u),
        formulas: "c = 0: Q(x1, x2) = Q1(x1) + Q2(x2)",
    },
];

pub fn find(name: &str) -> Option<&'static CaseEntry> {
    CASES.iter().find(|c| c.name == name)
}

pub fn summary(name: &str) -> &'static str {
    describe_case(name).unwrap_or("")
}

pub struct Template {
    pub name: &'static str,
    pub summary: &'static str,
    pub source: &'static str,
}

pub const TEMPLATES: [Template; 2] = [
    Template {
        name: "box_n1",
        summary: "box ground state evolved for 10 steps with every analysis enabled",
        source: include_str!("../../../scenarios/box_n1.cfg"),
    },
    Template {
        name: "two_slit",
        summary: "two-slit flow-line bundle, 10^4 quantile seeds",
        source: include_str!("../../../scenarios/two_slit.cfg"),
    },
];

pub fn template(name: &str) -> Option<&'static Template> {
    TEMPLATES.iter().find(|t| t.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scenario;

    #[test]
    fn every_library_case_is_listed() {
        for name in qflow::analytic::CASE_NAMES {
            assert!(find(name).is_some(), "{name}");
            assert!(!summary(name).is_empty());
        }
    }

    #[test]
    fn templates_parse() {
        for t in &TEMPLATES {
            Scenario::parse(t.source).unwrap_or_else(|e| panic!("{}: {e}", t.name));
        }
    }
}
