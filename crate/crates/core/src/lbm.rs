//! Classical D2Q9 lattice Boltzmann solver with BGK collision.
//!
//! Space and time are in lattice units (`dx = dt = 1`). A step is
//! collision followed by streaming; walls sit halfway between the
//! outermost node and the boundary, so bounce-back returns a population
//! to its site of origin with the direction reversed.
//!
//! Direction layout:
//!
//! ```text
//!   6   2   5
//!    \  |  /
//!   3 - 0 - 1
//!    /  |  \
//!   7   4   8
//! ```

use crate::{Error, Result};

/// Number of discrete velocities.
pub const Q: usize = 9;

/// Lattice sound speed squared, c_s² = 1/3.
pub const SOUND_SPEED_SQ: f64 = 1.0 / 3.0;

/// The D2Q9 velocity set: directions, weights and the reversal map.
#[derive(Debug, Clone, Copy)]
pub struct VelocitySet {
    pub directions: [[i32; 2]; Q],
    pub weights: [f64; Q],
    pub sound_speed_sq: f64,
    pub opposite: [usize; Q],
}

pub const D2Q9: VelocitySet = VelocitySet {
    directions: [
        [0, 0],
        [1, 0],
        [0, 1],
        [-1, 0],
        [0, -1],
        [1, 1],
        [-1, 1],
        [-1, -1],
        [1, -1],
    ],
    weights: [
        4.0 / 9.0,
        1.0 / 9.0,
        1.0 / 9.0,
        1.0 / 9.0,
        1.0 / 9.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
    ],
    sound_speed_sq: SOUND_SPEED_SQ,
    opposite: [0, 3, 4, 1, 2, 7, 8, 5, 6],
};

impl VelocitySet {
    pub fn d2q9() -> &'static VelocitySet {
        &D2Q9
    }

    #[inline]
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        let a = self.directions[i];
        let b = self.directions[j];
        (a[0] * b[0] + a[1] * b[1]) as f64
    }

    #[inline]
    pub fn dot_vec(&self, i: usize, u: [f64; 2]) -> f64 {
        let e = self.directions[i];
        e[0] as f64 * u[0] + e[1] as f64 * u[1]
    }
}

/// Boundary treatment of the square domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Periodic,
    BounceBack,
    /// Closed box whose left wall (x = -1/2) moves with `v_lid`.
    LidDriven {
        v_lid: [f64; 2],
    },
}

/// Rectangular lattice of `nx * ny` fluid nodes with a boundary rule.
///
/// Flat site index is `y * nx + x`; the per-population flat index used by
/// the vectorized representations is `site * 9 + direction`.
#[derive(Debug, Clone, Copy)]
pub struct LatticeGrid {
    pub nx: usize,
    pub ny: usize,
    pub boundary: Boundary,
}

impl LatticeGrid {
    pub fn new(nx: usize, ny: usize, boundary: Boundary) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid {
                reason: format!("grid must be at least 2x2, got {nx}x{ny}"),
            });
        }
        if let Boundary::LidDriven { v_lid } = boundary {
            let speed = (v_lid[0] * v_lid[0] + v_lid[1] * v_lid[1]).sqrt();
            if speed >= SOUND_SPEED_SQ.sqrt() {
                return Err(Error::InvalidGrid {
                    reason: format!("lid speed {speed} is not subsonic (c_s = 1/sqrt(3))"),
                });
            }
        }
        Ok(LatticeGrid { nx, ny, boundary })
    }

    pub fn n_sites(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn site_index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny);
        y * self.nx + x
    }

    #[inline]
    pub fn site_coords(&self, site: usize) -> (usize, usize) {
        (site % self.nx, site / self.nx)
    }

    /// Corner sites of the closed box.
    pub fn is_corner(&self, x: usize, y: usize) -> bool {
        (x == 0 || x == self.nx - 1) && (y == 0 || y == self.ny - 1)
    }
}

/// Per-site, per-direction populations `f_i(t, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    pub nx: usize,
    pub ny: usize,
    /// Length `nx * ny * 9`, flat index `site * 9 + i`.
    pub values: Vec<f64>,
    pub time_index: usize,
}

impl DistributionField {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        DistributionField {
            nx,
            ny,
            values: vec![0.0; nx * ny * Q],
            time_index: 0,
        }
    }

    pub fn from_values(nx: usize, ny: usize, values: Vec<f64>, time_index: usize) -> Self {
        assert_eq!(values.len(), nx * ny * Q, "field length mismatch");
        DistributionField {
            nx,
            ny,
            values,
            time_index,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn get(&self, site: usize, i: usize) -> f64 {
        self.values[site * Q + i]
    }

    #[inline]
    pub fn set(&mut self, site: usize, i: usize, v: f64) {
        self.values[site * Q + i] = v;
    }

    /// Density at a site: sum of its populations.
    pub fn density(&self, site: usize) -> f64 {
        let base = site * Q;
        self.values[base..base + Q].iter().sum()
    }

    /// Velocity at a site from the first moment of the populations.
    pub fn velocity(&self, site: usize) -> Result<[f64; 2]> {
        let rho = self.density(site);
        if rho == 0.0 {
            return Err(Error::DegenerateDensity { site });
        }
        let vs = VelocitySet::d2q9();
        let mut m = [0.0; 2];
        for i in 0..Q {
            let f = self.get(site, i);
            m[0] += vs.directions[i][0] as f64 * f;
            m[1] += vs.directions[i][1] as f64 * f;
        }
        Ok([m[0] / rho, m[1] / rho])
    }

    /// Total mass over the whole lattice.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Second-order Maxwell-Boltzmann equilibrium populations.
pub fn equilibrium(rho: f64, u: [f64; 2]) -> [f64; Q] {
    let vs = VelocitySet::d2q9();
    let uu = u[0] * u[0] + u[1] * u[1];
    let mut feq = [0.0; Q];
    for i in 0..Q {
        let eu = vs.dot_vec(i, u);
        feq[i] = vs.weights[i]
            * rho
            * (1.0 + eu / SOUND_SPEED_SQ + eu * eu / (2.0 * SOUND_SPEED_SQ * SOUND_SPEED_SQ)
                - uu / (2.0 * SOUND_SPEED_SQ));
    }
    feq
}

/// BGK collision `f* = (1 - omega) f + omega f_eq`, site by site.
///
/// Density and momentum at every site are invariant.
pub fn collide_bgk(field: &DistributionField, omega: f64) -> Result<DistributionField> {
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::UnstableRelaxation { omega });
    }
    let mut out = field.clone();
    for site in 0..field.n_sites() {
        let rho = field.density(site);
        let feq = if rho == 0.0 {
            [0.0; Q]
        } else {
            let u = field.velocity(site)?;
            equilibrium(rho, u)
        };
        for i in 0..Q {
            out.set(site, i, (1.0 - omega) * field.get(site, i) + omega * feq[i]);
        }
    }
    Ok(out)
}

/// Streaming step `f_i(t+1, n + e_i) = f*_i(t, n)` with the grid's
/// boundary rule applied where a population would leave the domain.
pub fn stream(field: &DistributionField, grid: &LatticeGrid) -> DistributionField {
    assert_eq!(
        (field.nx, field.ny),
        (grid.nx, grid.ny),
        "field does not match grid"
    );
    let vs = VelocitySet::d2q9();
    let mut out = DistributionField::zeros(grid.nx, grid.ny);
    out.time_index = field.time_index + 1;

    for y in 0..grid.ny {
        for x in 0..grid.nx {
            let site = grid.site_index(x, y);
            for i in 0..Q {
                let v = field.get(site, i);
                let e = vs.directions[i];
                let tx = x as i64 + e[0] as i64;
                let ty = y as i64 + e[1] as i64;
                match grid.boundary {
                    Boundary::Periodic => {
                        let wx = tx.rem_euclid(grid.nx as i64) as usize;
                        let wy = ty.rem_euclid(grid.ny as i64) as usize;
                        out.set(grid.site_index(wx, wy), i, v);
                    }
                    Boundary::BounceBack | Boundary::LidDriven { .. } => {
                        let inside =
                            tx >= 0 && tx < grid.nx as i64 && ty >= 0 && ty < grid.ny as i64;
                        if inside {
                            out.set(grid.site_index(tx as usize, ty as usize), i, v);
                        } else {
                            out.set(site, vs.opposite[i], v);
                        }
                    }
                }
            }
        }
    }

    if let Boundary::LidDriven { v_lid } = grid.boundary {
        apply_lid_correction(field, grid, v_lid, &mut out);
    }
    out
}

/// Dirichlet correction for populations reflected off the moving left
/// wall: `f_ibar(t+1, n) = f*_i(t, n) - (2 w_i v_lid . e_i / c_s^2) rho_w(n)`,
/// with the wall density expressed as a sum of local populations (the
/// nine populations arriving at `n` after the step, wall-pointing ones
/// replaced by their bounced counterparts). Corner sites keep plain
/// bounce-back.
fn apply_lid_correction(
    field: &DistributionField,
    grid: &LatticeGrid,
    v_lid: [f64; 2],
    out: &mut DistributionField,
) {
    let vs = VelocitySet::d2q9();
    if v_lid == [0.0, 0.0] {
        return;
    }
    for y in 1..grid.ny - 1 {
        let site = grid.site_index(0, y);
        let rho_w = wall_density(field, grid, 0, y);
        for i in [3, 6, 7] {
            let ve = vs.dot_vec(i, v_lid);
            if ve != 0.0 {
                let reflected = vs.opposite[i];
                let cur = out.get(site, reflected);
                out.set(
                    site,
                    reflected,
                    cur - 2.0 * vs.weights[i] * ve / SOUND_SPEED_SQ * rho_w,
                );
            }
        }
    }
}

/// Post-streaming density at a left-wall site, written in terms of
/// pre-streaming populations.
fn wall_density(field: &DistributionField, grid: &LatticeGrid, x: usize, y: usize) -> f64 {
    let vs = VelocitySet::d2q9();
    let mut rho = 0.0;
    for j in 0..Q {
        let e = vs.directions[j];
        let sx = x as i64 - e[0] as i64;
        let sy = y as i64 - e[1] as i64;
        let inside = sx >= 0 && sx < grid.nx as i64 && sy >= 0 && sy < grid.ny as i64;
        if inside {
            rho += field.get(grid.site_index(sx as usize, sy as usize), j);
        } else {
            // arriving from behind the wall: take the population that
            // bounces into direction j at this site
            rho += field.get(grid.site_index(x, y), vs.opposite[j]);
        }
    }
    rho
}

/// One full lattice Boltzmann step: BGK collision then streaming.
pub fn lbm_step(
    field: &DistributionField,
    grid: &LatticeGrid,
    omega: f64,
) -> Result<DistributionField> {
    let collided = collide_bgk(field, omega)?;
    Ok(stream(&collided, grid))
}

/// Sinusoidal (Kolmogorov) initialization.
///
/// `f_i(x, y) = w_i [1 + A_x e_ix cos(2 pi k_x y / N_y) + A_y e_iy cos(2 pi k_y x / N_x)]`
///
/// Note the cross pairing: `k_x` modulates along the y coordinate and
/// `k_y` along x. The direction projections `e_ix`, `e_iy` make the two
/// amplitudes velocity amplitudes (in units of c_s²): the resulting field
/// has density exactly 1 and velocity `c_s² (A_x cos(...), A_y cos(...))`
/// at every site.
pub fn init_kolmogorov(
    grid: &LatticeGrid,
    a_x: f64,
    a_y: f64,
    k_x: f64,
    k_y: f64,
) -> Result<DistributionField> {
    let vs = VelocitySet::d2q9();
    let mut field = DistributionField::zeros(grid.nx, grid.ny);
    let two_pi = 2.0 * std::f64::consts::PI;
    for y in 0..grid.ny {
        for x in 0..grid.nx {
            let site = grid.site_index(x, y);
            let cx = (two_pi / grid.ny as f64 * k_x * y as f64).cos();
            let cy = (two_pi / grid.nx as f64 * k_y * x as f64).cos();
            for i in 0..Q {
                let e = vs.directions[i];
                let v = vs.weights[i] * (1.0 + a_x * e[0] as f64 * cx + a_y * e[1] as f64 * cy);
                if v <= 0.0 {
                    return Err(Error::UnphysicalAmplitude {
                        site,
                        direction: i,
                        value: v,
                    });
                }
                field.set(site, i, v);
            }
        }
    }
    Ok(field)
}

/// Quiescent initialization for the lid-driven cavity: rest equilibrium
/// everywhere except the column adjacent to the moving wall, which is
/// seeded with the wall velocity (first-order equilibrium, so the site
/// velocity evaluates to `v_lid`).
pub fn init_lid(grid: &LatticeGrid, v_lid: [f64; 2]) -> Result<DistributionField> {
    if !matches!(grid.boundary, Boundary::LidDriven { .. }) {
        return Err(Error::InvalidGrid {
            reason: "init_lid requires a lid-driven grid".to_string(),
        });
    }
    let vs = VelocitySet::d2q9();
    let mut field = DistributionField::zeros(grid.nx, grid.ny);
    let a = [v_lid[0] / SOUND_SPEED_SQ, v_lid[1] / SOUND_SPEED_SQ];
    for y in 0..grid.ny {
        for x in 0..grid.nx {
            let site = grid.site_index(x, y);
            for i in 0..Q {
                let v = if x == 0 {
                    let e = vs.directions[i];
                    vs.weights[i] * (1.0 + a[0] * e[0] as f64 + a[1] * e[1] as f64)
                } else {
                    vs.weights[i]
                };
                if v <= 0.0 {
                    return Err(Error::UnphysicalAmplitude {
                        site,
                        direction: i,
                        value: v,
                    });
                }
                field.set(site, i, v);
            }
        }
    }
    Ok(field)
}

/// Kinematic viscosity implied by the relaxation frequency,
/// `nu = c_s² (1/omega - 1/2)`.
pub fn viscosity(omega: f64) -> f64 {
    SOUND_SPEED_SQ * (1.0 / omega - 0.5)
}

/// Derived Reynolds number `u_max N_x / nu`, with `u_max` the largest
/// speed of the initial field. Reported as metadata only.
pub fn reynolds_number(initial: &DistributionField, grid: &LatticeGrid, omega: f64) -> f64 {
    let mut u_max: f64 = 0.0;
    for site in 0..initial.n_sites() {
        if let Ok(u) = initial.velocity(site) {
            u_max = u_max.max((u[0] * u[0] + u[1] * u[1]).sqrt());
        }
    }
    u_max * grid.nx as f64 / viscosity(omega)
}
