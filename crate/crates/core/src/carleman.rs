//! Carleman linearization of the collision-streaming update.
//!
//! The collision step is expanded around the rest state into a linear
//! block `D` and a quadratic block `E` acting on same-site population
//! products; streaming becomes a sparse matrix `S` over the flattened
//! field (flat index `site * 9 + direction`). At first order the full
//! one-step operator is `C1 = S · blockdiag(D)`.
//!
//! At second order the product variables `g = f ⊗ f` evolve by
//! `(S·D) ⊗ (S·D)`, so a state that starts as a pure product stays one:
//! `g(t)` is carried as a single factor vector updated with `C1`. A
//! dense-`g` evolver is kept as a reference for small lattices.

use crate::lbm::{Boundary, DistributionField, LatticeGrid, VelocitySet, Q, SOUND_SPEED_SQ};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Linear collision block `D_ij = (1-w)δ_ij + w w_i (1 + e_i·e_j / c_s²)`.
#[derive(Debug, Clone)]
pub struct CollisionBlockD {
    pub entries: [[f64; Q]; Q],
}

impl CollisionBlockD {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }
}

/// Quadratic collision tensor
/// `E_ijk = (w w_i / c_s⁴)(e_i·e_j e_i·e_k − c_s² e_j·e_k)`.
#[derive(Debug, Clone)]
pub struct CollisionTensorE {
    pub entries: [[[f64; Q]; Q]; Q],
}

impl CollisionTensorE {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[i][j][k]
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::UnstableRelaxation { omega });
    }
    Ok(())
}

/// First-order (linear) collision block.
pub fn build_collision_first(omega: f64) -> Result<CollisionBlockD> {
    check_omega(omega)?;
    let vs = VelocitySet::d2q9();
    let mut d = [[0.0; Q]; Q];
    for i in 0..Q {
        for j in 0..Q {
            let delta = if i == j { 1.0 } else { 0.0 };
            d[i][j] = (1.0 - omega) * delta
                + omega * vs.weights[i] * (1.0 + vs.dot(i, j) / SOUND_SPEED_SQ);
        }
    }
    Ok(CollisionBlockD { entries: d })
}

/// Second-order (quadratic) collision tensor.
pub fn build_collision_second(omega: f64) -> Result<CollisionTensorE> {
    check_omega(omega)?;
    let vs = VelocitySet::d2q9();
    let cs4 = SOUND_SPEED_SQ * SOUND_SPEED_SQ;
    let mut e = [[[0.0; Q]; Q]; Q];
    for i in 0..Q {
        for j in 0..Q {
            for k in 0..Q {
                e[i][j][k] = omega * vs.weights[i] / cs4
                    * (vs.dot(i, j) * vs.dot(i, k) - SOUND_SPEED_SQ * vs.dot(j, k));
            }
        }
    }
    Ok(CollisionTensorE { entries: e })
}

/// Streaming operator over the flattened field, with the boundary rule
/// baked into the matrix rows.
#[derive(Debug, Clone)]
pub struct StreamingMatrix {
    pub matrix: CsrMatrix,
    pub boundary: Boundary,
}

/// Assemble the streaming matrix for a grid.
///
/// Row `(n, i)` reads column `(n - e_i, i)` in the interior. Where the
/// source lies behind a wall, bounce-back substitutes column `(n, ī)`;
/// rows reflected off the moving lid additionally carry the
/// `-2 w_i v_lid·e_i / c_s²` wall-density stencil, except at corner sites.
pub fn build_streaming(grid: &LatticeGrid) -> StreamingMatrix {
    let vs = VelocitySet::d2q9();
    let n = grid.n_sites() * Q;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(n);

    for y in 0..grid.ny {
        for x in 0..grid.nx {
            let site = grid.site_index(x, y);
            for i in 0..Q {
                let row = site * Q + i;
                let e = vs.directions[i];
                let sx = x as i64 - e[0] as i64;
                let sy = y as i64 - e[1] as i64;
                match grid.boundary {
                    Boundary::Periodic => {
                        let wx = sx.rem_euclid(grid.nx as i64) as usize;
                        let wy = sy.rem_euclid(grid.ny as i64) as usize;
                        triplets.push((row, grid.site_index(wx, wy) * Q + i, 1.0));
                    }
                    Boundary::BounceBack | Boundary::LidDriven { .. } => {
                        let inside =
                            sx >= 0 && sx < grid.nx as i64 && sy >= 0 && sy < grid.ny as i64;
                        if inside {
                            let src = grid.site_index(sx as usize, sy as usize);
                            triplets.push((row, src * Q + i, 1.0));
                        } else {
                            triplets.push((row, site * Q + vs.opposite[i], 1.0));
                        }
                    }
                }
            }
        }
    }

    if let Boundary::LidDriven { v_lid } = grid.boundary {
        if v_lid != [0.0, 0.0] {
            for y in 1..grid.ny - 1 {
                let site = grid.site_index(0, y);
                for i in [3usize, 6, 7] {
                    let ve = vs.dot_vec(i, v_lid);
                    if ve == 0.0 {
                        continue;
                    }
                    let row = site * Q + vs.opposite[i];
                    let coeff = -2.0 * vs.weights[i] * ve / SOUND_SPEED_SQ;
                    // wall-density stencil: the nine populations arriving
                    // at this site, wall-pointing sources replaced by
                    // their bounced counterparts
                    for j in 0..Q {
                        let e = vs.directions[j];
                        let sx = 0i64 - e[0] as i64;
                        let sy = y as i64 - e[1] as i64;
                        let inside =
                            sx >= 0 && sx < grid.nx as i64 && sy >= 0 && sy < grid.ny as i64;
                        let col = if inside {
                            grid.site_index(sx as usize, sy as usize) * Q + j
                        } else {
                            site * Q + vs.opposite[j]
                        };
                        triplets.push((row, col, coeff));
                    }
                }
            }
        }
    }

    StreamingMatrix {
        matrix: CsrMatrix::from_triplets(n, n, triplets),
        boundary: grid.boundary,
    }
}

/// Block-diagonal expansion of the 9x9 collision block over all sites.
pub fn block_collision_matrix(d: &CollisionBlockD, n_sites: usize) -> CsrMatrix {
    let n = n_sites * Q;
    let mut triplets = Vec::with_capacity(n * Q);
    for site in 0..n_sites {
        for i in 0..Q {
            for j in 0..Q {
                triplets.push((site * Q + i, site * Q + j, d.entries[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, triplets)
}

/// First-order Carleman matrix `C1 = S · blockdiag(D)`.
pub fn carleman_matrix_first(grid: &LatticeGrid, omega: f64) -> Result<CsrMatrix> {
    let d = build_collision_first(omega)?;
    let s = build_streaming(grid);
    Ok(s.matrix.matmul(&block_collision_matrix(&d, grid.n_sites())))
}

/// Truncation order of the Carleman expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarlemanOrder {
    First,
    Second,
}

impl CarlemanOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            CarlemanOrder::First => 1,
            CarlemanOrder::Second => 2,
        }
    }
}

/// Operators for evolving a flattened state at a fixed truncation order.
#[derive(Debug, Clone)]
pub struct CarlemanSystem {
    pub grid: LatticeGrid,
    pub omega: f64,
    pub order: CarlemanOrder,
    pub c1: CsrMatrix,
    collision_d: CollisionBlockD,
    collision_e: Option<CollisionTensorE>,
    streaming: StreamingMatrix,
}

impl CarlemanSystem {
    pub fn build(grid: LatticeGrid, omega: f64, order: CarlemanOrder) -> Result<Self> {
        let d = build_collision_first(omega)?;
        let s = build_streaming(&grid);
        let c1 = s.matrix.matmul(&block_collision_matrix(&d, grid.n_sites()));
        let e = match order {
            CarlemanOrder::First => None,
            CarlemanOrder::Second => Some(build_collision_second(omega)?),
        };
        Ok(CarlemanSystem {
            grid,
            omega,
            order,
            c1,
            collision_d: d,
            collision_e: e,
            streaming: s,
        })
    }

    pub fn streaming(&self) -> &StreamingMatrix {
        &self.streaming
    }

    /// blockdiag(D) applied without materializing the matrix.
    fn apply_block_d(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for site in 0..self.grid.n_sites() {
            let base = site * Q;
            for i in 0..Q {
                let mut acc = 0.0;
                for j in 0..Q {
                    acc += self.collision_d.entries[i][j] * x[base + j];
                }
                y[base + i] = acc;
            }
        }
        y
    }

    /// Same-site contraction of E against the rank-1 products of `h`.
    fn apply_e_diagonal(&self, h: &[f64]) -> Vec<f64> {
        let e = self
            .collision_e
            .as_ref()
            .expect("second-order system has an E tensor");
        let mut y = vec![0.0; h.len()];
        for site in 0..self.grid.n_sites() {
            let base = site * Q;
            let hv = &h[base..base + Q];
            for i in 0..Q {
                let mut acc = 0.0;
                for j in 0..Q {
                    for k in 0..Q {
                        acc += e.entries[i][j][k] * hv[j] * hv[k];
                    }
                }
                y[base + i] = acc;
            }
        }
        y
    }
}

/// Flattened Carleman state. At second order the product variables are
/// carried as one factor vector `h` with `g(n, m) = h(n) ⊗ h(m)`.
#[derive(Debug, Clone)]
pub struct CarlemanState {
    pub f: Vec<f64>,
    pub product_factor: Option<Vec<f64>>,
}

impl CarlemanState {
    pub fn from_field(field: &DistributionField, order: CarlemanOrder) -> Self {
        let f = field.values.clone();
        let product_factor = match order {
            CarlemanOrder::First => None,
            CarlemanOrder::Second => Some(f.clone()),
        };
        CarlemanState { f, product_factor }
    }
}

/// Evolve a state for `steps` steps; the returned trajectory includes the
/// initial state, so it has `steps + 1` entries.
pub fn evolve_carleman(
    initial: &CarlemanState,
    system: &CarlemanSystem,
    steps: usize,
) -> Vec<CarlemanState> {
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(initial.clone());
    let mut current = initial.clone();
    for _ in 0..steps {
        current = match system.order {
            CarlemanOrder::First => CarlemanState {
                f: system.c1.matvec(&current.f),
                product_factor: None,
            },
            CarlemanOrder::Second => {
                let h = current
                    .product_factor
                    .as_ref()
                    .expect("second-order state carries a product factor");
                let mut collided = system.apply_block_d(&current.f);
                let quad = system.apply_e_diagonal(h);
                for (c, q) in collided.iter_mut().zip(&quad) {
                    *c += q;
                }
                CarlemanState {
                    f: system.streaming.matrix.matvec(&collided),
                    product_factor: Some(system.c1.matvec(h)),
                }
            }
        };
        trajectory.push(current.clone());
    }
    trajectory
}

/// Root mean square error between a Carleman field and the reference
/// solver field: the mean over directions of the per-direction RMS of
/// `1 - f_carleman / f_lbm`.
pub fn rmse(f_carleman: &[f64], f_lbm: &[f64]) -> Result<f64> {
    if f_carleman.len() != f_lbm.len() {
        return Err(Error::ShapeMismatch {
            context: "rmse",
            expected: f_lbm.len(),
            actual: f_carleman.len(),
        });
    }
    assert!(
        f_lbm.len().is_multiple_of(Q),
        "field length must be a multiple of 9"
    );
    let n_sites = f_lbm.len() / Q;
    let mut total = 0.0;
    for i in 0..Q {
        let mut sum_sq = 0.0;
        for site in 0..n_sites {
            let idx = site * Q + i;
            if f_lbm[idx] == 0.0 {
                return Err(Error::UndefinedRatio { index: idx });
            }
            let r = 1.0 - f_carleman[idx] / f_lbm[idx];
            sum_sq += r * r;
        }
        total += (sum_sq / n_sites as f64).sqrt();
    }
    Ok(total / Q as f64)
}

/// Second-order reference evolver that stores the product variables `g`
/// densely and updates them with the materialized Kronecker operator
/// `(S·D) ⊗ (S·D)`. Small lattices only.
pub struct DenseSecondOrder {
    system: CarlemanSystem,
    c1_kron: CsrMatrix,
    dim: usize,
}

impl DenseSecondOrder {
    pub fn build(grid: LatticeGrid, omega: f64) -> Result<Self> {
        assert!(
            grid.n_sites() <= 16,
            "dense second-order reference is limited to 4x4 lattices"
        );
        let system = CarlemanSystem::build(grid, omega, CarlemanOrder::Second)?;
        let c1_kron = system.c1.kron(&system.c1);
        let dim = grid.n_sites() * Q;
        Ok(DenseSecondOrder {
            system,
            c1_kron,
            dim,
        })
    }

    /// Trajectory of `f` parts, `steps + 1` entries.
    pub fn evolve(&self, f0: &[f64], steps: usize) -> Vec<Vec<f64>> {
        assert_eq!(f0.len(), self.dim);
        let mut f = f0.to_vec();
        let mut g = vec![0.0; self.dim * self.dim];
        for p in 0..self.dim {
            for q in 0..self.dim {
                g[p * self.dim + q] = f0[p] * f0[q];
            }
        }
        let mut trajectory = vec![f.clone()];
        let e = self
            .system
            .collision_e
            .as_ref()
            .expect("dense reference is second order");
        for _ in 0..steps {
            let mut collided = self.system.apply_block_d(&f);
            for site in 0..self.system.grid.n_sites() {
                let base = site * Q;
                for i in 0..Q {
                    let mut acc = 0.0;
                    for j in 0..Q {
                        for k in 0..Q {
                            acc += e.entries[i][j][k] * g[(base + j) * self.dim + (base + k)];
                        }
                    }
                    collided[base + i] += acc;
                }
            }
            f = self.system.streaming.matrix.matvec(&collided);
            g = self.c1_kron.matvec(&g);
            trajectory.push(f.clone());
        }
        trajectory
    }
}
