use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants shared by a simulation: reduced Planck constant,
/// one mass per coordinate axis (particle label), and named couplings such
/// as a Coulomb strength `e2` or a contact-well strength `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub masses: Vec<f64>,
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem {
            hbar: 1.0,
            masses: vec![1.0],
            couplings: BTreeMap::new(),
        }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, masses: Vec<f64>) -> Result<Self> {
        let units = UnitSystem {
            hbar,
            masses,
            couplings: BTreeMap::new(),
        };
        units.validate()?;
        Ok(units)
    }

    pub fn with_hbar(hbar: f64) -> Result<Self> {
        Self::new(hbar, vec![1.0])
    }

    pub fn with_coupling(mut self, name: &str, value: f64) -> Self {
        self.couplings.insert(name.to_string(), value);
        self
    }

    pub fn coupling(&self, name: &str) -> Option<f64> {
        self.couplings.get(name).copied()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidUnits(format!(
                "hbar must be > 0, got {}",
                self.hbar
            )));
        }
        if self.masses.is_empty() {
            return Err(Error::InvalidUnits("at least one mass is required".into()));
        }
        if let Some(m) = self.masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidUnits(format!("masses must be > 0, got {m}")));
        }
        Ok(())
    }

    /// Mass attached to coordinate axis `axis`; a single mass applies to all axes.
    pub fn mass(&self, axis: usize) -> f64 {
        if self.masses.len() == 1 {
            self.masses[0]
        } else {
            self.masses[axis.min(self.masses.len() - 1)]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_natural_units() {
        let u = UnitSystem::default();
        assert_eq!(u.hbar, 1.0);
        assert_eq!(u.mass(0), 1.0);
        assert_eq!(u.mass(1), 1.0);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(UnitSystem::new(0.0, vec![1.0]).is_err());
        assert!(UnitSystem::new(1.0, vec![1.0, -2.0]).is_err());
        assert!(UnitSystem::new(1.0, vec![]).is_err());
    }

    #[test]
    fn per_axis_masses() {
        let u = UnitSystem::new(1.0, vec![1.0, 2.5]).unwrap();
        assert_eq!(u.mass(1), 2.5);
    }
}
