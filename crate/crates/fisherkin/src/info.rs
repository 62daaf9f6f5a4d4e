//! Entropy and Fisher-information functionals on velocity grids, with the
//! semigroup flows needed for the de Bruijn, Stam and Gaussian-minimiser
//! checks.
//!
//! Fisher information is discretized through the square root,
//! I(f) = 4 int |grad sqrt(f)|^2, which is equal to int |grad f|^2 / f in the
//! continuum and stays finite cell-by-cell as f -> 0. Cells below 1e-300
//! contribute zero to H and I.

use crate::error::{FisherkinError, Result};
use crate::grid::{unravel, DensityGrid, GaussianSpec};

const ZERO_FLOOR: f64 = 1e-300;

fn require_mass(f: &DensityGrid) -> Result<()> {
    if f.is_empty() || !(f.mass() > 0.0) {
        return Err(FisherkinError::EmptyDomain(
            "density has no cells or zero mass".into(),
        ));
    }
    Ok(())
}

/// Per-axis derivative: centered differences in the interior, one-sided at
/// the boundary (densities are assumed compactly supported inside the box).
fn axis_derivative(values: &[f64], shape: &[usize], spacing: &[f64], axis: usize) -> Vec<f64> {
    let dim = shape.len();
    let n = values.len();
    let mut stride = 1usize;
    for a in (axis + 1)..dim {
        stride *= shape[a];
    }
    let na = shape[axis];
    let h = spacing[axis];
    let mut out = vec![0.0; n];
    let mut idx = vec![0usize; dim];
    for (flat, o) in out.iter_mut().enumerate() {
        unravel(flat, shape, &mut idx);
        let i = idx[axis];
        *o = if i == 0 {
            (values[flat + stride] - values[flat]) / h
        } else if i == na - 1 {
            (values[flat] - values[flat - stride]) / h
        } else {
            (values[flat + stride] - values[flat - stride]) / (2.0 * h)
        };
    }
    out
}

/// Boltzmann entropy H(f) = sum f log f * cell volume, with 0 log 0 = 0.
pub fn entropy(f: &DensityGrid) -> Result<f64> {
    require_mass(f)?;
    let acc: f64 = f
        .values
        .iter()
        .map(|&v| if v > ZERO_FLOOR { v * v.ln() } else { 0.0 })
        .sum();
    Ok(acc * f.cell_volume())
}

/// Fisher information I(f) = 4 sum |grad sqrt(f)|^2 * cell volume.
///
/// Translation-invariant by construction: shifting the value array leaves
/// every centered difference unchanged.
pub fn fisher_information(f: &DensityGrid) -> Result<f64> {
    require_mass(f)?;
    let g: Vec<f64> = f.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let mut acc = 0.0;
    for a in 0..f.dim {
        let da = axis_derivative(&g, &f.shape, &f.spacing, a);
        acc += da.iter().map(|d| d * d).sum::<f64>();
    }
    Ok(4.0 * acc * f.cell_volume())
}

/// Relative entropy H_gamma(f) = int f log(f / gamma) against an isotropic
/// Gaussian reference; nonnegative for probability densities.
pub fn relative_entropy(f: &DensityGrid, reference: &GaussianSpec) -> Result<f64> {
    require_mass(f)?;
    if reference.dim != f.dim {
        return Err(FisherkinError::DimMismatch(
            "reference dimension != grid dimension".into(),
        ));
    }
    let d = f.dim as f64;
    let log_norm = 0.5 * d * (2.0 * std::f64::consts::PI * reference.variance).ln();
    let mut acc = 0.0;
    let mut idx = vec![0usize; f.dim];
    for (flat, &v) in f.values.iter().enumerate() {
        if v <= ZERO_FLOOR {
            continue;
        }
        unravel(flat, &f.shape, &mut idx);
        let mut r2 = 0.0;
        for a in 0..f.dim {
            let x = f.origin[a] + f.spacing[a] * idx[a] as f64;
            r2 += (x - reference.mean[a]) * (x - reference.mean[a]);
        }
        acc += v * (v.ln() + r2 / (2.0 * reference.variance) + log_norm);
    }
    Ok(acc * f.cell_volume())
}

/// Relative Fisher information I_gamma(f) = int f |grad log(f/gamma)|^2,
/// assembled as sum |2 grad sqrt(f) + sqrt(f) (x - u)/sigma^2|^2 so it is
/// nonnegative cell-by-cell.
pub fn relative_fisher(f: &DensityGrid, reference: &GaussianSpec) -> Result<f64> {
    require_mass(f)?;
    if reference.dim != f.dim {
        return Err(FisherkinError::DimMismatch(
            "reference dimension != grid dimension".into(),
        ));
    }
    let g: Vec<f64> = f.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let mut acc = 0.0;
    let mut idx = vec![0usize; f.dim];
    for a in 0..f.dim {
        let da = axis_derivative(&g, &f.shape, &f.spacing, a);
        for (flat, &dg) in da.iter().enumerate() {
            unravel(flat, &f.shape, &mut idx);
            let x = f.origin[a] + f.spacing[a] * idx[a] as f64;
            let w = (x - reference.mean[a]) / reference.variance;
            let t = 2.0 * dg + g[flat] * w;
            acc += t * t;
        }
    }
    Ok(acc * f.cell_volume())
}

/// Tensor square of a 1D density: values(v, v_*) = f(v) f(v_*).
/// Satisfies I(f (x) f) = 2 I(f), H(f (x) f) = 2 H(f), mass = mass(f)^2.
pub fn tensor_square(f: &DensityGrid) -> Result<DensityGrid> {
    if f.dim != 1 {
        return Err(FisherkinError::InvalidParameter(
            "tensor_square supports 1D inputs only".into(),
        ));
    }
    let n = f.shape[0];
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push(f.values[i] * f.values[j]);
        }
    }
    DensityGrid::new(
        2,
        vec![n, n],
        vec![f.origin[0], f.origin[0]],
        vec![f.spacing[0], f.spacing[0]],
        values,
    )
}

/// Rescaled convolution Q_alpha(f, g) = f_{sqrt(1-alpha)} * g_{sqrt(alpha)},
/// the interpolation appearing in the Blachman-Stam inequality. The result is
/// renormalized to the product of the input masses.
pub fn convolve_rescale(f: &DensityGrid, g: &DensityGrid, alpha: f64) -> Result<DensityGrid> {
    if f.dim != g.dim {
        return Err(FisherkinError::DimMismatch(
            "convolve_rescale needs equal dimensions".into(),
        ));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(FisherkinError::InvalidParameter(format!(
            "alpha must lie in [0,1], got {alpha}"
        )));
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    if alpha == 1.0 {
        return Ok(g.clone());
    }
    let fr = f.rescale((1.0 - alpha).sqrt())?;
    let gr = g.rescale(alpha.sqrt())?;
    // common per-axis spacing: the finer of the two; resample each factor
    let dim = f.dim;
    let mut spacing = vec![0.0; dim];
    for a in 0..dim {
        spacing[a] = fr.spacing[a].min(gr.spacing[a]);
    }
    let resample_to = |src: &DensityGrid| -> Result<DensityGrid> {
        let mut shape = vec![0usize; dim];
        for a in 0..dim {
            let extent = src.spacing[a] * (src.shape[a] - 1) as f64;
            shape[a] = (extent / spacing[a]).ceil() as usize + 1;
        }
        src.resample(src.origin.clone(), spacing.clone(), shape)
    };
    let fr = resample_to(&fr)?;
    let gr = resample_to(&gr)?;
    // full discrete convolution
    let mut shape = vec![0usize; dim];
    let mut origin = vec![0.0; dim];
    for a in 0..dim {
        shape[a] = fr.shape[a] + gr.shape[a] - 1;
        origin[a] = fr.origin[a] + gr.origin[a];
    }
    let n_out: usize = shape.iter().product();
    let mut values = vec![0.0; n_out];
    let cell = fr.cell_volume();
    let mut fi = vec![0usize; dim];
    let mut gi = vec![0usize; dim];
    let mut oi = vec![0usize; dim];
    for (fflat, &fv) in fr.values.iter().enumerate() {
        if fv <= 0.0 {
            continue;
        }
        unravel(fflat, &fr.shape, &mut fi);
        for (gflat, &gv) in gr.values.iter().enumerate() {
            if gv <= 0.0 {
                continue;
            }
            unravel(gflat, &gr.shape, &mut gi);
            for a in 0..dim {
                oi[a] = fi[a] + gi[a];
            }
            let mut flat = 0usize;
            for a in 0..dim {
                flat = flat * shape[a] + oi[a];
            }
            values[flat] += fv * gv * cell;
        }
    }
    let mut out = DensityGrid::new(dim, shape, origin, spacing, values)?;
    let target = f.mass() * g.mass();
    if out.mass() > 0.0 {
        let scale = target / out.mass();
        let rescaled: Vec<f64> = out.values.iter().map(|v| v * scale).collect();
        out.set_values(rescaled)?;
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Flow {
    Heat,
    FokkerPlanck,
}

/// Largest stable explicit step for the flow on this grid.
fn stable_step(f: &DensityGrid, flow: Flow) -> f64 {
    let h_min = f.spacing.iter().cloned().fold(f64::INFINITY, f64::min);
    let diffusive = h_min * h_min / (2.0 * f.dim as f64);
    match flow {
        Flow::Heat => 0.25 * diffusive,
        Flow::FokkerPlanck => {
            let mut xmax: f64 = 0.0;
            for a in 0..f.dim {
                let lo = f.origin[a].abs();
                let hi = (f.origin[a] + f.spacing[a] * (f.shape[a] - 1) as f64).abs();
                xmax = xmax.max(lo.max(hi));
            }
            0.25 * diffusive.min(h_min / xmax.max(1e-12))
        }
    }
}

fn evolve(f: &DensityGrid, t: f64, steps: Option<usize>, flow: Flow) -> Result<DensityGrid> {
    require_mass(f)?;
    if t < 0.0 {
        return Err(FisherkinError::InvalidParameter("t must be >= 0".into()));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let dt_stab = stable_step(f, flow);
    let suggested = (t / dt_stab).ceil() as usize;
    let n = match steps {
        Some(s) => {
            if s < suggested {
                return Err(FisherkinError::CflViolation {
                    steps: s,
                    suggested,
                });
            }
            s
        }
        None => suggested,
    };
    let dt = t / n as f64;
    let dim = f.dim;
    let mut values = f.values.clone();
    let mut idx = vec![0usize; dim];
    let mut delta = vec![0.0f64; values.len()];
    for _ in 0..n {
        delta.iter_mut().for_each(|d| *d = 0.0);
        for a in 0..dim {
            let mut stride = 1usize;
            for b in (a + 1)..dim {
                stride *= f.shape[b];
            }
            let h = f.spacing[a];
            let na = f.shape[a];
            for flat in 0..values.len() {
                unravel(flat, &f.shape, &mut idx);
                let i = idx[a];
                if i == na - 1 {
                    continue; // flux on the face (i, i+1) handled from the left cell
                }
                // diffusive flux through the face between i and i+1
                let mut flux = (values[flat + stride] - values[flat]) / h;
                if let Flow::FokkerPlanck = flow {
                    // drift term div(f x): centered face average
                    let x_face = f.origin[a] + h * (i as f64 + 0.5);
                    flux += x_face * 0.5 * (values[flat + stride] + values[flat]);
                }
                // zero-flux outer boundary: faces at the box edge carry none
                delta[flat] += dt * flux / h;
                delta[flat + stride] -= dt * flux / h;
            }
        }
        for (v, d) in values.iter_mut().zip(&delta) {
            *v = (*v + d).max(0.0);
        }
    }
    DensityGrid::new(
        dim,
        f.shape.clone(),
        f.origin.clone(),
        f.spacing.clone(),
        values,
    )
}

/// Heat flow: explicit conservative stepping of df/dt = Laplacian f.
/// Mass is conserved to roundoff (zero-flux form); the step count is chosen
/// internally unless given, and a too-small explicit count is a CFL error.
pub fn heat_evolve(f: &DensityGrid, t: f64, steps: Option<usize>) -> Result<DensityGrid> {
    evolve(f, t, steps, Flow::Heat)
}

/// Linear Fokker-Planck (adjoint Ornstein-Uhlenbeck) flow:
/// df/dt = Laplacian f + div(f v); equilibrium is the standard Gaussian.
pub fn fokker_planck_evolve(f: &DensityGrid, t: f64, steps: Option<usize>) -> Result<DensityGrid> {
    evolve(f, t, steps, Flow::FokkerPlanck)
}
