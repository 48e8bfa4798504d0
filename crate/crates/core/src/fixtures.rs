//! Synthetic descriptors bundled with the crate.

use crate::manifold::ManifoldDescriptor;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    /// One cusp, quadratic potential.
    Quadratic,
    /// One cusp with quartic and sextic terms and a complex volume.
    Quartic,
    /// Two identical copies of [`Fixture::Quartic`].
    Product2,
    /// Two cusps with unrelated shapes and a mixed term.
    Nonsymmetric2,
}

impl Fixture {
    pub const ALL: [Fixture; 4] = [
        Fixture::Quadratic,
        Fixture::Quartic,
        Fixture::Product2,
        Fixture::Nonsymmetric2,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Fixture::Quadratic => "quadratic.json",
            Fixture::Quartic => "quartic.json",
            Fixture::Product2 => "product2.json",
            Fixture::Nonsymmetric2 => "nonsymmetric2.json",
        }
    }

    pub fn json(self) -> &'static str {
        match self {
            Fixture::Quadratic => include_str!("../fixtures/quadratic.json"),
            Fixture::Quartic => include_str!("../fixtures/quartic.json"),
            Fixture::Product2 => include_str!("../fixtures/product2.json"),
            Fixture::Nonsymmetric2 => include_str!("../fixtures/nonsymmetric2.json"),
        }
    }

    pub fn load(self) -> Result<ManifoldDescriptor> {
        ManifoldDescriptor::from_json_str(self.json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_load() {
        for f in Fixture::ALL {
            let d = f.load().unwrap();
            assert!(d.cusps() >= 1, "{}", f.file_name());
        }
    }

    #[test]
    fn product_fixture_is_the_synthesized_product() {
        let p = Fixture::Product2.load().unwrap();
        let s = Fixture::Quartic.load().unwrap().synthesize_product(2).unwrap();
        assert_eq!(p.shapes, s.shapes);
        assert_eq!(p.potential, s.potential);
        assert!(p.is_identical_product());
    }

    #[test]
    fn nonsymmetric_fixture_has_distinct_shapes() {
        let d = Fixture::Nonsymmetric2.load().unwrap();
        assert_ne!(d.shapes[0], d.shapes[1]);
        assert!(!d.is_identical_product());
    }
}
