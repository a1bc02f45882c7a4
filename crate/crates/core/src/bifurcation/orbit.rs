use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Result, VeldtError};
use crate::galerkin::{Basis, Discretization};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitReport {
    /// Orbit label of each input field.
    pub labels: Vec<usize>,
    /// Members of each orbit, in input order.
    pub orbits: Vec<Vec<usize>>,
    /// Fields invariant under every translation (constants).
    pub fixed_points: Vec<bool>,
    pub count: usize,
}

/// Coefficients of `x ↦ v(x + t)` on the trigonometric basis `1, cos, sin, cos 2·, sin 2·, …`.
pub fn translate(disc: &Discretization, v: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    let Basis::Fourier { len, count, .. } = *disc.basis() else {
        return Err(VeldtError::Capability(
            "translations need a periodic discretization".into(),
        ));
    };
    let omega = 2.0 * std::f64::consts::PI / len;
    let mut out = v.clone();
    for i in 0..disc.components() {
        let off = i * count;
        let mut k = 1;
        while k < count {
            let freq = k.div_ceil(2) as f64 * omega;
            let (s, c) = (freq * t).sin_cos();
            let a = v[off + k];
            let b = if k + 1 < count { v[off + k + 1] } else { 0.0 };
            out[off + k] = a * c + b * s;
            if k + 1 < count {
                out[off + k + 1] = b * c - a * s;
            }
            k += 2;
        }
    }
    Ok(out)
}

/// `min_t ‖u − τ_t v‖_{m,2}` over a shift grid refined by golden-section search.
pub fn orbit_distance(disc: &Discretization, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let Basis::Fourier { len, count, .. } = *disc.basis() else {
        return Err(VeldtError::Capability(
            "translations need a periodic discretization".into(),
        ));
    };
    let n = (16 * count).max(256);
    let h = len / n as f64;
    let dist = |t: f64| -> Result<f64> { Ok(disc.norm(&(u - translate(disc, v, t)?))) };
    let mut best = (0.0, f64::INFINITY);
    for i in 0..n {
        let t = i as f64 * h;
        let d = dist(t)?;
        if d < best.1 {
            best = (t, d);
        }
    }
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if dist(c)? < dist(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(best.1.min(dist(0.5 * (a + b))?))
}

/// Groups fields into translation orbits; two fields share an orbit when some shift
/// brings them within `tol`, closed transitively.
pub fn orbit_group(
    solutions: &[DVector<f64>],
    disc: &Discretization,
    tol: f64,
) -> Result<OrbitReport> {
    let Basis::Fourier { count, .. } = *disc.basis() else {
        return Err(VeldtError::Capability(
            "orbit grouping needs periodic boundary conditions".into(),
        ));
    };
    let n = solutions.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if root(&mut parent, i) == root(&mut parent, j) {
                continue;
            }
            if orbit_distance(disc, &solutions[i], &solutions[j])? < tol {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[rj.max(ri)] = ri.min(rj);
            }
        }
    }
    let mut labels = vec![0; n];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        let l = match seen.iter().position(|s| *s == r) {
            Some(l) => l,
            None => {
                seen.push(r);
                orbits.push(Vec::new());
                seen.len() - 1
            }
        };
        labels[i] = l;
        orbits[l].push(i);
    }
    let fixed_points = solutions
        .iter()
        .map(|u| {
            let mut moving = u.clone();
            for i in 0..disc.components() {
                moving[i * count] = 0.0;
            }
            disc.norm(&moving) < tol
        })
        .collect();
    Ok(OrbitReport {
        count: orbits.len(),
        labels,
        orbits,
        fixed_points,
    })
}
