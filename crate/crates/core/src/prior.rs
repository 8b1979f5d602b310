use crate::error::{Error, Result};

/// Mass-sum slack accepted when validating a discrete prior.
pub const MASS_TOL: f64 = 1e-12;

/// A point mass of a discrete prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// A scalar signal law: finitely many atoms, or a centered Gaussian.
///
/// Raw moments `s_1..s_6` are computed once at construction.
#[derive(Debug, Clone)]
pub struct Prior {
    kind: PriorKind,
    moments: [f64; 6],
}

#[derive(Debug, Clone)]
pub enum PriorKind {
    Discrete(Vec<Atom>),
    Gaussian { variance: f64 },
}

impl Prior {
    pub fn discrete(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Config(
                "discrete prior needs at least one atom".into(),
            ));
        }
        let mut total = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if !(a.mass > 0.0 && a.mass <= 1.0) || !a.mass.is_finite() {
                return Err(Error::Config(format!("atom mass {} not in (0,1]", a.mass)));
            }
            if !a.location.is_finite() {
                return Err(Error::Config("atom location must be finite".into()));
            }
            if i > 0 && atoms[i - 1].location >= a.location {
                return Err(Error::Config(
                    "atom locations must be strictly increasing".into(),
                ));
            }
            total += a.mass;
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Config(format!(
                "atom masses sum to {total}, expected 1 within {MASS_TOL:e}"
            )));
        }
        let mut moments = [0.0; 6];
        for a in &atoms {
            let mut pow = 1.0;
            for m in moments.iter_mut() {
                pow *= a.location;
                *m += a.mass * pow;
            }
        }
        Ok(Prior {
            kind: PriorKind::Discrete(atoms),
            moments,
        })
    }

    /// Convenience constructor from `(location, mass)` pairs in any order.
    pub fn from_atoms(pairs: &[(f64, f64)]) -> Result<Self> {
        let mut atoms: Vec<Atom> = pairs
            .iter()
            .map(|&(location, mass)| Atom { location, mass })
            .collect();
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Self::discrete(atoms)
    }

    pub fn point_mass(location: f64) -> Self {
        Self::discrete(vec![Atom {
            location,
            mass: 1.0,
        }])
        .expect("point mass is valid")
    }

    pub fn gaussian(variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::Config(format!(
                "gaussian prior variance must be positive, got {variance}"
            )));
        }
        let v = variance;
        // Central moments of N(0, v): odd vanish, E[x^4] = 3v^2, E[x^6] = 15v^3.
        let moments = [0.0, v, 0.0, 3.0 * v * v, 0.0, 15.0 * v * v * v];
        Ok(Prior {
            kind: PriorKind::Gaussian { variance },
            moments,
        })
    }

    pub fn kind(&self) -> &PriorKind {
        &self.kind
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.kind {
            PriorKind::Discrete(a) => Some(a),
            PriorKind::Gaussian { .. } => None,
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(&self.kind, PriorKind::Discrete(a) if a.len() == 1)
    }

    /// Raw moment `s_k`, `k` in 1..=6.
    pub fn moment(&self, k: usize) -> f64 {
        assert!((1..=6).contains(&k), "moment order {k} outside 1..=6");
        self.moments[k - 1]
    }

    pub fn mean(&self) -> f64 {
        self.moments[0]
    }

    pub fn second_moment(&self) -> f64 {
        self.moments[1]
    }

    pub fn variance(&self) -> f64 {
        self.moments[1] - self.moments[0] * self.moments[0]
    }

    /// Effective support `[lo, hi]` used to size tabulation windows.
    ///
    /// Discrete priors use the exact atom range. For a Gaussian prior the
    /// `tail` quantile is cut from each side, so windows built from these
    /// bounds keep the same mass guarantee as in the discrete case.
    pub fn support_bounds(&self, tail: f64) -> (f64, f64) {
        match &self.kind {
            PriorKind::Discrete(atoms) => (atoms[0].location, atoms[atoms.len() - 1].location),
            PriorKind::Gaussian { variance } => {
                let z = crate::channel::normal_quantile(1.0 - tail);
                let half = z * variance.sqrt();
                (-half, half)
            }
        }
    }

    /// Largest absolute support point (quantile-based for Gaussian priors).
    pub fn support_scale(&self, tail: f64) -> f64 {
        let (lo, hi) = self.support_bounds(tail);
        lo.abs().max(hi.abs())
    }

    /// Serialize as plain-text records: `atom <location> <mass>` lines,
    /// or a single `gaussian <variance>` line.
    pub fn to_records(&self) -> String {
        match &self.kind {
            PriorKind::Discrete(atoms) => atoms
                .iter()
                .map(|a| format!("atom {} {}\n", a.location, a.mass))
                .collect(),
            PriorKind::Gaussian { variance } => format!("gaussian {variance}\n"),
        }
    }

    /// Parse the record format produced by [`Prior::to_records`].
    /// Blank lines and `#` comments are skipped.
    pub fn parse_records(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut gaussian: Option<f64> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("atom") => {
                    let location = parse_field(parts.next(), "atom location")?;
                    let mass = parse_field(parts.next(), "atom mass")?;
                    atoms.push(Atom { location, mass });
                }
                Some("gaussian") => {
                    gaussian = Some(parse_field(parts.next(), "gaussian variance")?);
                }
                Some(other) => {
                    return Err(Error::Parse(format!("unknown prior record `{other}`")));
                }
                None => {}
            }
        }
        match (gaussian, atoms.is_empty()) {
            (Some(_), false) => Err(Error::Parse(
                "prior mixes `gaussian` and `atom` records".into(),
            )),
            (Some(v), true) => Prior::gaussian(v),
            (None, false) => {
                atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
                Prior::discrete(atoms)
            }
            (None, true) => Err(Error::Parse("no prior records found".into())),
        }
    }
}

fn parse_field(field: Option<&str>, what: &str) -> Result<f64> {
    field
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_moments_match_direct_sum() {
        let p = Prior::from_atoms(&[(0.0, 0.7), (0.2, 0.15), (1.0, 0.15)]).unwrap();
        assert!((p.moment(1) - 0.18).abs() < 1e-15);
        assert!((p.moment(2) - 0.156).abs() < 1e-15);
        assert!((p.variance() - (0.156 - 0.18 * 0.18)).abs() < 1e-15);
        assert!(p.second_moment() >= p.mean() * p.mean());
    }

    #[test]
    fn gaussian_moments() {
        let p = Prior::gaussian(2.0).unwrap();
        assert_eq!(p.moment(1), 0.0);
        assert_eq!(p.moment(2), 2.0);
        assert_eq!(p.moment(4), 12.0);
        assert_eq!(p.moment(6), 120.0);
    }

    #[test]
    fn rejects_bad_masses_and_order() {
        assert!(Prior::from_atoms(&[(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(Prior::discrete(vec![
            Atom {
                location: 1.0,
                mass: 0.5
            },
            Atom {
                location: 0.0,
                mass: 0.5
            },
        ])
        .is_err());
        assert!(Prior::discrete(vec![]).is_err());
        assert!(Prior::gaussian(0.0).is_err());
    }

    #[test]
    fn records_round_trip() {
        let p = Prior::from_atoms(&[(-1.0, 0.1), (0.0, 0.8), (1.0, 0.1)]).unwrap();
        let q = Prior::parse_records(&p.to_records()).unwrap();
        assert_eq!(q.atoms().unwrap().len(), 3);
        assert!((q.moment(2) - p.moment(2)).abs() < 1e-15);

        let g = Prior::parse_records("gaussian 1.5\n").unwrap();
        assert_eq!(g.moment(2), 1.5);
        assert!(Prior::parse_records("atom 0 0.5\ngaussian 1\n").is_err());
    }
}
