//! Planar and spatial coordinates for strategy trajectories.
//!
//! Three-strategy simplices map exactly onto an equilateral triangle with
//! side `sqrt(2)`. Larger strategies are reduced by principal component
//! analysis, fitted per trajectory.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::MixedStrategy;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Image of the three simplex vertices.
pub const TRIANGLE: [[f64; 2]; 3] = [[0.0, 0.0], [SQRT2 / 2.0, 2.449_489_742_783_178 / 2.0], [SQRT2, 0.0]];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarPath {
    /// One coordinate row per input point, each of length `dim`.
    pub points: Vec<Vec<f64>>,
    pub dim: usize,
    /// Fraction of total variance captured by the retained components (PCA only).
    pub captured_variance: Option<f64>,
    /// Set when all input points coincide and PCA has no direction to fit.
    pub degenerate: bool,
}

/// Barycentric-to-Cartesian map of a three-strategy simplex point:
/// `(x, y) = s * [[0, 0], [sqrt2/2, sqrt6/2], [sqrt2, 0]]`.
pub fn simplex3_to_plane(weights: &[f64]) -> Result<[f64; 2]> {
    if weights.len() != 3 {
        return Err(Error::Shape(format!(
            "barycentric projection needs 3 strategies, got {}",
            weights.len()
        )));
    }
    let mut xy = [0.0; 2];
    for (w, vertex) in weights.iter().zip(&TRIANGLE) {
        xy[0] += w * vertex[0];
        xy[1] += w * vertex[1];
    }
    Ok(xy)
}

/// Projects a sequence of three-strategy mixed strategies onto the plane.
pub fn barycentric_path(strategies: &[MixedStrategy]) -> Result<PlanarPath> {
    let points = strategies
        .iter()
        .map(|s| simplex3_to_plane(s.weights()).map(|xy| xy.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(PlanarPath {
        points,
        dim: 2,
        captured_variance: None,
        degenerate: false,
    })
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order (ties by original index) and the
/// matching unit eigenvectors as columns, `vectors[row][col]`.
#[allow(clippy::needless_range_loop)]
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frob: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (values, vectors)
}

/// Projects `points` onto their top `out_dim` principal directions. Each
/// direction is signed so that its largest-magnitude loading is positive.
#[allow(clippy::needless_range_loop)]
pub fn pca_project(points: &[Vec<f64>], out_dim: usize) -> Result<PlanarPath> {
    if !(out_dim == 2 || out_dim == 3) {
        return Err(Error::InvalidParameter(format!(
            "output dimension must be 2 or 3, got {out_dim}"
        )));
    }
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "PCA needs at least 2 points, got {}",
            points.len()
        )));
    }
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::Shape(format!("points of length {d} and {}", p.len())));
    }
    if d < out_dim {
        return Err(Error::Shape(format!(
            "points of dimension {d} cannot be projected to {out_dim} dimensions"
        )));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("points contain non-finite values".into()));
    }

    let n = points.len() as f64;
    let mean: Vec<f64> = (0..d).map(|c| points.iter().map(|p| p[c]).sum::<f64>() / n).collect();
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut cov = vec![vec![0.0; d]; d];
    for p in &centered {
        for i in 0..d {
            if p[i] == 0.0 {
                continue;
            }
            for j in i..d {
                cov[i][j] += p[i] * p[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= n - 1.0;
            cov[j][i] = cov[i][j];
        }
    }
    let total_variance: f64 = (0..d).map(|i| cov[i][i]).sum();
    if total_variance <= 0.0 {
        return Ok(PlanarPath {
            points: vec![vec![0.0; out_dim]; points.len()],
            dim: out_dim,
            captured_variance: Some(0.0),
            degenerate: true,
        });
    }

    let (values, vectors) = symmetric_eigen(&cov);
    let mut components: Vec<Vec<f64>> = (0..out_dim).map(|c| (0..d).map(|r| vectors[r][c]).collect()).collect();
    for comp in components.iter_mut() {
        let lead = comp
            .iter()
            .copied()
            .reduce(|best, x| if x.abs() > best.abs() { x } else { best })
            .unwrap_or(0.0);
        if lead < 0.0 {
            comp.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let captured: f64 = values[..out_dim].iter().map(|v| v.max(0.0)).sum();
    let projected = centered
        .iter()
        .map(|p| {
            components
                .iter()
                .map(|comp| comp.iter().zip(p).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(PlanarPath {
        points: projected,
        dim: out_dim,
        captured_variance: Some((captured / total_variance).min(1.0)),
        degenerate: false,
    })
}
