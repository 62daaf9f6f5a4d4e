//! Nonnegative densities sampled on regular boxes in velocity space (d <= 3).

use crate::error::{FisherkinError, Result};
use std::io::{BufRead, Write};

/// A nonnegative density on a regular box grid, row-major storage.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub values: Vec<f64>,
    mass: f64,
}

/// Isotropic Gaussian reference: mean vector and scalar variance sigma^2.
#[derive(Debug, Clone)]
pub struct GaussianSpec {
    pub dim: usize,
    pub mean: Vec<f64>,
    pub variance: f64,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(FisherkinError::InvalidParameter(format!(
                "Gaussian variance must be positive, got {variance}"
            )));
        }
        Ok(GaussianSpec {
            dim: mean.len(),
            mean,
            variance,
        })
    }

    pub fn standard(dim: usize) -> Self {
        GaussianSpec {
            dim,
            mean: vec![0.0; dim],
            variance: 1.0,
        }
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        let d = self.dim as f64;
        let r2: f64 = x
            .iter()
            .zip(&self.mean)
            .map(|(xi, ui)| (xi - ui) * (xi - ui))
            .sum();
        (-r2 / (2.0 * self.variance)).exp()
            / (2.0 * std::f64::consts::PI * self.variance).powf(d / 2.0)
    }
}

impl DensityGrid {
    pub fn new(
        dim: usize,
        shape: Vec<usize>,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(FisherkinError::InvalidParameter(format!(
                "grid dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if shape.len() != dim || origin.len() != dim || spacing.len() != dim {
            return Err(FisherkinError::DimMismatch(
                "shape/origin/spacing rank must equal dim".into(),
            ));
        }
        let n: usize = shape.iter().product();
        if n == 0 || values.len() != n {
            return Err(FisherkinError::EmptyDomain(format!(
                "expected {n} values, got {}",
                values.len()
            )));
        }
        if spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(FisherkinError::InvalidParameter(
                "spacings must be positive".into(),
            ));
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(FisherkinError::InvalidParameter(
                "density values must be finite and nonnegative".into(),
            ));
        }
        let mut g = DensityGrid {
            dim,
            shape,
            origin,
            spacing,
            values,
            mass: 0.0,
        };
        g.mass = g.compute_mass();
        Ok(g)
    }

    /// Sample a closed-form density on a centered box.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(
        dim: usize,
        shape: Vec<usize>,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        f: F,
    ) -> Result<Self> {
        let n: usize = shape.iter().product();
        let mut values = Vec::with_capacity(n);
        let mut idx = vec![0usize; dim];
        let mut x = vec![0.0f64; dim];
        for flat in 0..n {
            unravel(flat, &shape, &mut idx);
            for a in 0..dim {
                x[a] = origin[a] + spacing[a] * idx[a] as f64;
            }
            values.push(f(&x).max(0.0));
        }
        DensityGrid::new(dim, shape, origin, spacing, values)
    }

    /// Sample an isotropic Gaussian on [mean - r sigma, mean + r sigma]^d with
    /// n points per axis.
    pub fn sample_gaussian(spec: &GaussianSpec, n_per_axis: usize, radius_sigmas: f64) -> Result<Self> {
        let sigma = spec.variance.sqrt();
        let half = radius_sigmas * sigma;
        let h = 2.0 * half / (n_per_axis as f64 - 1.0);
        let origin: Vec<f64> = spec.mean.iter().map(|u| u - half).collect();
        let spacing = vec![h; spec.dim];
        let shape = vec![n_per_axis; spec.dim];
        DensityGrid::from_fn(spec.dim, shape, origin, spacing, |x| spec.density(x))
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    fn compute_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Cached total mass; recomputed and re-cached on any mutation method.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Replace values (kept nonnegative) and refresh the mass cache.
    pub fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(FisherkinError::DimMismatch("value count changed".into()));
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(FisherkinError::InvalidParameter(
                "density values must be finite and nonnegative".into(),
            ));
        }
        self.values = values;
        self.mass = self.compute_mass();
        Ok(())
    }

    pub fn coordinate(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0usize; self.dim];
        unravel(flat, &self.shape, &mut idx);
        (0..self.dim)
            .map(|a| self.origin[a] + self.spacing[a] * idx[a] as f64)
            .collect()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for a in 0..self.dim {
            flat = flat * self.shape[a] + idx[a];
        }
        flat
    }

    /// First moment / mass.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        let mut idx = vec![0usize; self.dim];
        for (flat, &v) in self.values.iter().enumerate() {
            unravel(flat, &self.shape, &mut idx);
            for a in 0..self.dim {
                acc[a] += v * (self.origin[a] + self.spacing[a] * idx[a] as f64);
            }
        }
        let scale = self.cell_volume() / self.mass;
        acc.iter_mut().for_each(|x| *x *= scale);
        acc
    }

    /// Scalar variance: (1/d) int f |x - u|^2 / mass.
    pub fn variance_scalar(&self) -> f64 {
        let u = self.mean();
        let mut acc = 0.0;
        let mut idx = vec![0usize; self.dim];
        for (flat, &v) in self.values.iter().enumerate() {
            unravel(flat, &self.shape, &mut idx);
            let mut r2 = 0.0;
            for a in 0..self.dim {
                let x = self.origin[a] + self.spacing[a] * idx[a] as f64;
                r2 += (x - u[a]) * (x - u[a]);
            }
            acc += v * r2;
        }
        acc * self.cell_volume() / (self.mass * self.dim as f64)
    }

    /// Fraction of mass sitting in boundary cells: densities are assumed
    /// compactly supported inside the box, so this should stay below ~1e-8.
    pub fn tail_mass_fraction(&self) -> f64 {
        let mut acc = 0.0;
        let mut idx = vec![0usize; self.dim];
        for (flat, &v) in self.values.iter().enumerate() {
            unravel(flat, &self.shape, &mut idx);
            if (0..self.dim).any(|a| idx[a] == 0 || idx[a] == self.shape[a] - 1) {
                acc += v;
            }
        }
        acc * self.cell_volume() / self.mass
    }

    /// Exact rescaling f_lambda(x) = lambda^{-d} f(x / lambda): pure relabeling
    /// of the grid geometry, no interpolation, mass preserved exactly.
    pub fn rescale(&self, lambda: f64) -> Result<DensityGrid> {
        if !(lambda > 0.0) {
            return Err(FisherkinError::InvalidParameter(
                "rescaling factor must be positive".into(),
            ));
        }
        let scale = lambda.powi(-(self.dim as i32));
        DensityGrid::new(
            self.dim,
            self.shape.clone(),
            self.origin.iter().map(|o| o * lambda).collect(),
            self.spacing.iter().map(|h| h * lambda).collect(),
            self.values.iter().map(|v| v * scale).collect(),
        )
    }

    /// Translate the density by an integer number of cells per axis
    /// (values shift, geometry unchanged; cells shifted in from outside are 0).
    pub fn translate_cells(&self, shift: &[isize]) -> Result<DensityGrid> {
        if shift.len() != self.dim {
            return Err(FisherkinError::DimMismatch("shift rank".into()));
        }
        let mut values = vec![0.0; self.values.len()];
        let mut idx = vec![0usize; self.dim];
        'outer: for flat in 0..self.values.len() {
            unravel(flat, &self.shape, &mut idx);
            let mut src = vec![0usize; self.dim];
            for a in 0..self.dim {
                let s = idx[a] as isize - shift[a];
                if s < 0 || s >= self.shape[a] as isize {
                    continue 'outer;
                }
                src[a] = s as usize;
            }
            values[flat] = self.values[self.flat_index(&src)];
        }
        DensityGrid::new(
            self.dim,
            self.shape.clone(),
            self.origin.clone(),
            self.spacing.clone(),
            values,
        )
    }

    /// Multilinear interpolation at an arbitrary point (0 outside the box).
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let mut base = vec![0usize; self.dim];
        let mut frac = vec![0.0f64; self.dim];
        for a in 0..self.dim {
            let t = (x[a] - self.origin[a]) / self.spacing[a];
            if t < 0.0 || t > (self.shape[a] - 1) as f64 {
                return 0.0;
            }
            let i = (t.floor() as usize).min(self.shape[a] - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let corners = 1usize << self.dim;
        let mut acc = 0.0;
        let mut idx = vec![0usize; self.dim];
        for c in 0..corners {
            let mut w = 1.0;
            for a in 0..self.dim {
                let hi = (c >> a) & 1 == 1;
                idx[a] = base[a] + hi as usize;
                w *= if hi { frac[a] } else { 1.0 - frac[a] };
            }
            if w > 0.0 {
                acc += w * self.values[self.flat_index(&idx)];
            }
        }
        acc
    }

    /// Resample onto a new regular grid by multilinear interpolation.
    pub fn resample(&self, origin: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>) -> Result<DensityGrid> {
        DensityGrid::from_fn(self.dim, shape, origin, spacing, |x| self.interpolate(x))
    }

    /// Plain-text format: header `dim n1 [n2 [n3]] origin... spacing...`,
    /// then whitespace-separated values in row-major order.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = format!("{}", self.dim);
        for n in &self.shape {
            header.push_str(&format!(" {n}"));
        }
        for o in &self.origin {
            header.push_str(&format!(" {o:.17e}"));
        }
        for h in &self.spacing {
            header.push_str(&format!(" {h:.17e}"));
        }
        writeln!(w, "{header}")?;
        for chunk in self.values.chunks(8) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<DensityGrid> {
        let mut tokens = Vec::new();
        for line in r.lines() {
            let line = line?;
            for tok in line.split_whitespace() {
                tokens.push(tok.to_string());
            }
        }
        let mut it = tokens.into_iter();
        let mut next_f64 = |what: &str| -> Result<f64> {
            it.next()
                .ok_or_else(|| FisherkinError::Parse(format!("missing {what}")))?
                .parse::<f64>()
                .map_err(|e| FisherkinError::Parse(format!("{what}: {e}")))
        };
        let dim = next_f64("dim")? as usize;
        if !(1..=3).contains(&dim) {
            return Err(FisherkinError::Parse(format!("bad dim {dim}")));
        }
        let mut shape = Vec::with_capacity(dim);
        for _ in 0..dim {
            shape.push(next_f64("shape")? as usize);
        }
        let mut origin = Vec::with_capacity(dim);
        for _ in 0..dim {
            origin.push(next_f64("origin")?);
        }
        let mut spacing = Vec::with_capacity(dim);
        for _ in 0..dim {
            spacing.push(next_f64("spacing")?);
        }
        let n: usize = shape.iter().product();
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(next_f64("value")?);
        }
        DensityGrid::new(dim, shape, origin, spacing, values)
    }
}

pub(crate) fn unravel(flat: usize, shape: &[usize], idx: &mut [usize]) {
    let mut rem = flat;
    for a in (0..shape.len()).rev() {
        idx[a] = rem % shape[a];
        rem /= shape[a];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_sampling_has_unit_mass() {
        for d in 1..=2 {
            let spec = GaussianSpec::standard(d);
            let g = DensityGrid::sample_gaussian(&spec, 81, 7.0).unwrap();
            assert_relative_eq!(g.mass(), 1.0, max_relative = 1e-8);
            assert!(g.tail_mass_fraction() < 1e-8);
            assert_relative_eq!(g.variance_scalar(), 1.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn mass_cache_tracks_mutation() {
        let spec = GaussianSpec::standard(1);
        let mut g = DensityGrid::sample_gaussian(&spec, 41, 6.0).unwrap();
        let doubled: Vec<f64> = g.values.iter().map(|v| 2.0 * v).collect();
        g.set_values(doubled).unwrap();
        assert_relative_eq!(g.mass(), 2.0, max_relative = 1e-8);
        // cache consistent with a fresh sum to 1e-12
        assert_relative_eq!(
            g.mass(),
            g.values.iter().sum::<f64>() * g.cell_volume(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn rescale_is_exact_relabeling() {
        let spec = GaussianSpec::standard(1);
        let g = DensityGrid::sample_gaussian(&spec, 101, 6.0).unwrap();
        let h = g.rescale(2.0).unwrap();
        assert_relative_eq!(h.mass(), g.mass(), epsilon = 1e-14);
        assert_relative_eq!(h.spacing[0], 2.0 * g.spacing[0], epsilon = 1e-15);
        // f_2 sampled at 2x equals f(x)/2
        assert_relative_eq!(h.values[50], g.values[50] / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn save_load_round_trip() {
        let spec = GaussianSpec::new(vec![0.3, -0.2], 0.7).unwrap();
        let g = DensityGrid::sample_gaussian(&spec, 21, 5.0).unwrap();
        let mut buf = Vec::new();
        g.save(&mut buf).unwrap();
        let h = DensityGrid::load(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(g.shape, h.shape);
        for (a, b) in g.values.iter().zip(&h.values) {
            assert_relative_eq!(a, b, epsilon = 0.0);
        }
        assert_relative_eq!(g.origin[1], h.origin[1], epsilon = 0.0);
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let g = DensityGrid::from_fn(
            2,
            vec![11, 11],
            vec![0.0, 0.0],
            vec![0.1, 0.1],
            |x| 1.0 + 2.0 * x[0] + 3.0 * x[1],
        )
        .unwrap();
        assert_relative_eq!(g.interpolate(&[0.123, 0.456]), 1.0 + 0.246 + 1.368, epsilon = 1e-12);
        assert_eq!(g.interpolate(&[-0.01, 0.5]), 0.0);
    }
}
