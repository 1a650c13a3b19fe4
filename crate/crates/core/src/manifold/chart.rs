use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::error::GeometryError;
use crate::exprkit::Point;

/// Ordered coordinate names with an open domain box per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    coords: Vec<String>,
    domain: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new(coords: &[&str], domain: &[(f64, f64)]) -> Result<Chart, GeometryError> {
        Chart::from_owned(coords.iter().map(|s| s.to_string()).collect(), domain.to_vec())
    }

    pub fn from_owned(coords: Vec<String>, domain: Vec<(f64, f64)>) -> Result<Chart, GeometryError> {
        if coords.len() < 2 {
            return Err(GeometryError::InvalidChart("dimension must be at least 2".into()));
        }
        if coords.len() != domain.len() {
            return Err(GeometryError::InvalidChart(format!(
                "{} coordinates but {} domain intervals",
                coords.len(),
                domain.len()
            )));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(GeometryError::InvalidChart(format!("duplicate coordinate `{c}`")));
            }
            let (lo, hi) = domain[i];
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(GeometryError::EmptyBox(c.clone()));
            }
        }
        Ok(Chart { coords, domain })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.domain).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    pub fn point(&self, x: &[f64]) -> Point {
        Point(self.coords.iter().cloned().zip(x.iter().copied()).collect())
    }

    /// Coordinate values in chart order; missing names map to NaN.
    pub fn values(&self, p: &Point) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| p.get(c).unwrap_or(f64::NAN))
            .collect()
    }
}

/// Deterministic uniform samples from the domain box.
pub fn sample_points(chart: &Chart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            chart
                .domain()
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_reproducible_and_contained() {
        let pi = std::f64::consts::PI;
        let c = Chart::new(&["r", "theta"], &[(0.5, 10.0), (0.2, pi - 0.2)]).unwrap();
        let a = sample_points(&c, 50, 7);
        assert_eq!(a, sample_points(&c, 50, 7));
        assert_ne!(a, sample_points(&c, 50, 8));
        assert!(a.iter().all(|x| c.contains(x)));
    }

    #[test]
    fn rejects_bad_charts() {
        assert!(Chart::new(&["x"], &[(0.0, 1.0)]).is_err());
        assert!(Chart::new(&["x", "x"], &[(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(matches!(
            Chart::new(&["x", "y"], &[(0.0, 1.0), (2.0, 2.0)]),
            Err(GeometryError::EmptyBox(_))
        ));
    }
}
