//! Cusped-manifold descriptors: cusp shapes, the truncated Neumann–Zagier
//! potential and the optional complex volume, with JSON ingestion.
//!
//! Coefficients are kept as the decimal strings found in the file and only
//! converted to binary floating point, at whatever precision a caller asks
//! for, when a computation needs them.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rug::Float;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::scalar::{ComplexScalar, Precision};
use crate::series::MultiIndex;
use crate::{invariant, Result};

/// A complex number stored as two decimal strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecimalComplex {
    pub re: String,
    pub im: String,
}

impl DecimalComplex {
    pub fn new(re: impl Into<String>, im: impl Into<String>) -> Self {
        DecimalComplex {
            re: re.into(),
            im: im.into(),
        }
    }

    /// Shortest round-trip decimal form of a double.
    pub fn from_c64(z: Complex64) -> Self {
        DecimalComplex::new(format!("{:?}", z.re), format!("{:?}", z.im))
    }

    pub fn to_c64(&self) -> Result<Complex64> {
        Complex64::parse(&self.re, &self.im, Precision::DOUBLE)
    }

    pub fn to_scalar<C: ComplexScalar>(&self, prec: Precision) -> Result<C> {
        C::parse(&self.re, &self.im, prec)
    }

    fn validate(&self, field: &str) -> Result<(Float, Float)> {
        let p = |s: &str| {
            Float::parse(s.trim())
                .map(|v| Float::with_val(64, v))
                .map_err(|_| invariant(field, format!("not a decimal number: {s:?}")))
        };
        Ok((p(&self.re)?, p(&self.im)?))
    }
}

impl Serialize for DecimalComplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [&self.re, &self.im].serialize(s)
    }
}

/// Accepts either a decimal string or a JSON number; strings are kept verbatim.
#[derive(Deserialize)]
#[serde(untagged)]
enum NumberText {
    Text(String),
    Number(serde_json::Number),
}

impl NumberText {
    fn into_string(self) -> String {
        match self {
            NumberText::Text(s) => s,
            NumberText::Number(n) => n.to_string(),
        }
    }
}

impl<'de> Deserialize<'de> for DecimalComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts: Vec<NumberText> = Vec::deserialize(d)?;
        if parts.len() != 2 {
            return Err(de::Error::custom(format!(
                "complex number needs [re, im], got {} entries",
                parts.len()
            )));
        }
        let mut it = parts.into_iter();
        let re = it.next().expect("len 2").into_string();
        let im = it.next().expect("len 2").into_string();
        Ok(DecimalComplex { re, im })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CuspShape {
    pub tau: DecimalComplex,
}

impl CuspShape {
    pub fn tau_c64(&self) -> Complex64 {
        self.tau.to_c64().expect("validated at load")
    }
}

/// Truncated potential `Φ = Σ τ_j u_j² + Σ c_J u^J` with every `J` even.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NzPotential {
    nvars: usize,
    degree_cutoff: u32,
    quad: Vec<DecimalComplex>,
    higher: BTreeMap<MultiIndex, DecimalComplex>,
}

impl NzPotential {
    pub fn new(
        quad: Vec<DecimalComplex>,
        degree_cutoff: u32,
        higher: BTreeMap<MultiIndex, DecimalComplex>,
    ) -> Result<Self> {
        let pot = NzPotential {
            nvars: quad.len(),
            degree_cutoff,
            quad,
            higher,
        };
        pot.validate()?;
        Ok(pot)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree_cutoff(&self) -> u32 {
        self.degree_cutoff
    }

    pub fn quad(&self) -> &[DecimalComplex] {
        &self.quad
    }

    pub fn higher(&self) -> &BTreeMap<MultiIndex, DecimalComplex> {
        &self.higher
    }

    fn validate(&self) -> Result<()> {
        let d = self.degree_cutoff;
        if d < 2 || !d.is_multiple_of(2) {
            return Err(invariant(
                "potential.degree_cutoff",
                format!("must be an even integer >= 2, got {d}"),
            ));
        }
        for (idx, c) in &self.higher {
            let field = format!("potential.terms[{idx}]");
            if idx.len() != self.nvars {
                return Err(invariant(
                    field,
                    format!("index has {} entries for {} cusps", idx.len(), self.nvars),
                ));
            }
            if idx.0.iter().any(|e| e % 2 != 0) {
                return Err(invariant(field, "odd exponent in even potential"));
            }
            let deg = idx.degree();
            if deg < 4 {
                return Err(invariant(field, "terms below degree 4 are fixed by the cusp shapes"));
            }
            if deg > d {
                return Err(invariant(
                    field,
                    format!("total degree {deg} exceeds degree_cutoff {d}"),
                ));
            }
            c.validate(&field)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifoldDescriptor {
    pub name: String,
    pub shapes: Vec<CuspShape>,
    pub potential: NzPotential,
    pub vol_complex: Option<DecimalComplex>,
    pub provenance: String,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    index: Vec<u32>,
    coeff: DecimalComplex,
}

#[derive(Serialize, Deserialize)]
struct PotentialFile {
    degree_cutoff: u32,
    #[serde(default)]
    terms: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct DescriptorFile {
    name: String,
    cusps: usize,
    shapes: Vec<DecimalComplex>,
    #[serde(default)]
    vol_complex: Option<DecimalComplex>,
    potential: PotentialFile,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    provenance: String,
}

impl ManifoldDescriptor {
    pub fn cusps(&self) -> usize {
        self.shapes.len()
    }

    pub fn taus(&self) -> Vec<Complex64> {
        self.shapes.iter().map(CuspShape::tau_c64).collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: DescriptorFile = serde_json::from_str(text)?;
        Self::from_file_model(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_model()).expect("descriptor serializes")
    }

    fn from_file_model(file: DescriptorFile) -> Result<Self> {
        if file.cusps == 0 {
            return Err(invariant("cusps", "must be positive"));
        }
        if file.shapes.len() != file.cusps {
            return Err(invariant(
                "shapes",
                format!("{} shapes for {} cusps", file.shapes.len(), file.cusps),
            ));
        }
        for (j, tau) in file.shapes.iter().enumerate() {
            let (_, im) = tau.validate(&format!("shapes[{j}]"))?;
            if im.is_zero() {
                return Err(invariant(
                    format!("shapes[{j}]"),
                    "cusp shape must have nonzero imaginary part",
                ));
            }
        }
        if let Some(vol) = &file.vol_complex {
            let (re, _) = vol.validate("vol_complex")?;
            if re <= 0 {
                return Err(invariant("vol_complex", "volume (real part) must be positive"));
            }
        }
        let mut higher = BTreeMap::new();
        for term in file.potential.terms {
            let idx = MultiIndex(term.index);
            if idx.len() != file.cusps {
                return Err(invariant(
                    format!("potential.terms[{idx}]"),
                    format!("index has {} entries for {} cusps", idx.len(), file.cusps),
                ));
            }
            if higher.insert(idx.clone(), term.coeff).is_some() {
                return Err(invariant(format!("potential.terms[{idx}]"), "duplicate multi-index"));
            }
        }
        let potential = NzPotential::new(file.shapes.clone(), file.potential.degree_cutoff, higher)?;
        Ok(ManifoldDescriptor {
            name: file.name,
            shapes: file.shapes.into_iter().map(|tau| CuspShape { tau }).collect(),
            potential,
            vol_complex: file.vol_complex,
            provenance: file.provenance,
        })
    }

    fn to_file_model(&self) -> DescriptorFile {
        DescriptorFile {
            name: self.name.clone(),
            cusps: self.cusps(),
            shapes: self.shapes.iter().map(|s| s.tau.clone()).collect(),
            vol_complex: self.vol_complex.clone(),
            potential: PotentialFile {
                degree_cutoff: self.potential.degree_cutoff,
                terms: self
                    .potential
                    .higher
                    .iter()
                    .map(|(k, c)| TermFile {
                        index: k.0.clone(),
                        coeff: c.clone(),
                    })
                    .collect(),
            },
            provenance: self.provenance.clone(),
        }
    }

    /// `copies` identical copies of a one-cusped descriptor in disjoint
    /// variables: `Φ(u_1) + ... + Φ(u_n)`.
    pub fn synthesize_product(&self, copies: usize) -> Result<Self> {
        if copies < 1 {
            return Err(invariant("copies", "must be at least 1"));
        }
        if self.cusps() != 1 {
            return Err(invariant(
                "descriptor",
                format!("product needs a 1-cusp descriptor, got {} cusps", self.cusps()),
            ));
        }
        if copies == 1 {
            return Ok(self.clone());
        }
        let tau = self.shapes[0].tau.clone();
        let mut higher = BTreeMap::new();
        for (k, c) in &self.potential.higher {
            for slot in 0..copies {
                let mut e = vec![0; copies];
                e[slot] = k.get(0);
                higher.insert(MultiIndex(e), c.clone());
            }
        }
        let potential = NzPotential::new(vec![tau.clone(); copies], self.potential.degree_cutoff, higher)?;
        Ok(ManifoldDescriptor {
            name: format!("{}^{copies}", self.name),
            shapes: vec![CuspShape { tau }; copies],
            potential,
            vol_complex: self.vol_complex.clone(),
            provenance: format!("product of {copies} copies of {}", self.name),
        })
    }

    /// True when the descriptor is a product of identical one-cusp charts.
    pub fn is_identical_product(&self) -> bool {
        let n = self.cusps();
        let tau = &self.shapes[0].tau;
        if self.shapes.iter().any(|s| &s.tau != tau) {
            return false;
        }
        let mut single: BTreeMap<u32, &DecimalComplex> = BTreeMap::new();
        for (k, c) in &self.potential.higher {
            let support: Vec<usize> = (0..n).filter(|&j| k.get(j) > 0).collect();
            if support.len() != 1 {
                return false;
            }
            let e = k.get(support[0]);
            match single.get(&e) {
                Some(prev) if *prev != c => return false,
                _ => {
                    single.insert(e, c);
                }
            }
        }
        single.keys().all(|&e| {
            (0..n).all(|slot| {
                let mut idx = vec![0; n];
                idx[slot] = e;
                self.potential.higher.contains_key(&MultiIndex(idx))
            })
        })
    }
}
