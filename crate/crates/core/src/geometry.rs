//! Panel and scene geometry.
//!
//! A rectangular surface of unit cells sits in a plane defined by its center
//! and unit normal. The normal points toward the base station side; points on
//! that side are served by reflection, points behind the panel by
//! transmission. Element positions, arrival/departure angles, and side
//! classification all derive from this frame.

use crate::error::{Error, Result};
use crate::num::{wrap_angle, Real};

// ── Points and vectors ──────────────────────────────────────────────────────

/// 3-D point or vector in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3<F> {
    pub x: F,
    pub y: F,
    pub z: F,
}

impl<F: Real> Point3<F> {
    pub fn new(x: F, y: F, z: F) -> Self {
        Self { x, y, z }
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn scale(self, s: F) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Self) -> F {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> F {
        self.dot(self).sqrt()
    }

    /// Euclidean distance to another point.
    pub fn dist(self, o: Self) -> F {
        self.sub(o).norm()
    }

    /// Unit vector in the direction of `self`; `None` for (near-)zero input.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n.is_finite() && n > F::zero() {
            Some(self.scale(n.recip()))
        } else {
            None
        }
    }
}

// ── Directions and sides ────────────────────────────────────────────────────

/// Direction relative to the panel frame: polar angle `theta` measured from
/// the surface normal and azimuth `phi` measured in the panel plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction<F> {
    /// Angle from the normal, in `[0, π]`.
    pub theta: F,
    /// In-plane azimuth from the column axis toward the row axis, in `[0, 2π)`.
    pub phi: F,
}

/// Which side of the panel a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The normal (base station) side, served by reflection.
    Reflective,
    /// The far side, served by transmission.
    Transmissive,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Reflective => write!(f, "reflective"),
            Side::Transmissive => write!(f, "transmissive"),
        }
    }
}

// ── Panel ───────────────────────────────────────────────────────────────────

/// Rectangular grid of surface elements.
///
/// Elements are numbered `1..=rows*cols` in row-major order and placed on a
/// centered grid: element centers span `(cols-1)*delta_x` by `(rows-1)*delta_y`
/// around `center`, so the physical aperture is `cols*delta_x` by
/// `rows*delta_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelGeometry<F> {
    pub rows: u32,
    pub cols: u32,
    /// Element pitch along the column axis, metres.
    pub delta_x: F,
    /// Element pitch along the row axis, metres.
    pub delta_y: F,
    pub center: Point3<F>,
    /// Unit normal; points toward the base station side.
    pub normal: Point3<F>,
    /// PIN diodes per element; supports up to `2^n_diodes` phase states.
    pub n_diodes: u32,
    /// Number of admissible phase states, `1 <= s_a <= 2^n_diodes`.
    pub s_a: u32,
}

impl<F: Real> PanelGeometry<F> {
    /// Validates and builds a panel. The normal is normalized here; a zero
    /// normal, empty grid, non-positive pitch, or unsupported phase-state
    /// count is rejected.
    pub fn new(
        rows: u32,
        cols: u32,
        delta_x: F,
        delta_y: F,
        center: Point3<F>,
        normal: Point3<F>,
        n_diodes: u32,
        s_a: u32,
    ) -> Result<Self> {
        if rows < 1 || cols < 1 {
            return Err(Error::Config(format!(
                "panel must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if !(delta_x > F::zero()) || !(delta_y > F::zero()) {
            return Err(Error::Config(
                "panel element pitch must be positive".into(),
            ));
        }
        if n_diodes < 1 || n_diodes > 30 {
            return Err(Error::Config(format!(
                "n_diodes must be in 1..=30, got {n_diodes}"
            )));
        }
        let max_states = 1u64 << n_diodes;
        if s_a < 1 || u64::from(s_a) > max_states {
            return Err(Error::Config(format!(
                "s_a must satisfy 1 <= s_a <= 2^n_diodes = {max_states}, got {s_a}"
            )));
        }
        let normal = normal.normalized().ok_or_else(|| {
            Error::Config("panel normal must be a nonzero vector".into())
        })?;
        Ok(Self {
            rows,
            cols,
            delta_x,
            delta_y,
            center,
            normal,
            n_diodes,
            s_a,
        })
    }

    /// Total element count `M`.
    pub fn num_elements(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    /// In-plane basis `(col_axis, row_axis)`.
    ///
    /// The column axis is the horizontal in-plane direction (`z × normal`
    /// normalized); for a horizontal normal the row axis then comes out
    /// vertical. When the normal itself is vertical the column axis falls
    /// back to global `x`. `row_axis = normal × col_axis` completes a
    /// right-handed frame.
    pub fn axes(&self) -> (Point3<F>, Point3<F>) {
        let up = Point3::new(F::zero(), F::zero(), F::one());
        let col = match up.cross(self.normal).normalized() {
            Some(c) => c,
            None => Point3::new(F::one(), F::zero(), F::zero()),
        };
        let row = self.normal.cross(col);
        (col, row)
    }

    /// Center of element `m` (1-based, row-major).
    pub fn element_position(&self, m: usize) -> Point3<F> {
        let count = self.num_elements();
        assert!(
            (1..=count).contains(&m),
            "element index {m} out of range 1..={count}"
        );
        let row = (m - 1) / self.cols as usize;
        let col = (m - 1) % self.cols as usize;
        let (col_axis, row_axis) = self.axes();
        let half = F::of(0.5);
        let u = (F::of(col as f64) - F::of((self.cols - 1) as f64) * half) * self.delta_x;
        let v = (F::of(row as f64) - F::of((self.rows - 1) as f64) * half) * self.delta_y;
        self.center.add(col_axis.scale(u)).add(row_axis.scale(v))
    }

    /// Signed distance of `p` from the panel plane (positive on the normal
    /// side).
    pub fn plane_distance(&self, p: Point3<F>) -> F {
        p.sub(self.center).dot(self.normal)
    }

    /// Copy of this panel with a different grid size.
    pub fn with_grid(&self, rows: u32, cols: u32) -> Result<Self> {
        Self::new(
            rows,
            cols,
            self.delta_x,
            self.delta_y,
            self.center,
            self.normal,
            self.n_diodes,
            self.s_a,
        )
    }
}

// ── Operations ──────────────────────────────────────────────────────────────

/// Center of element `m` (1-based, row-major) of `panel`.
pub fn element_position<F: Real>(panel: &PanelGeometry<F>, m: usize) -> Point3<F> {
    panel.element_position(m)
}

/// Arrival and departure directions at element `m` for a signal from `src`
/// forwarded toward `dst`.
///
/// `theta` is measured from the panel normal, so a point on the normal side
/// sees `theta < π/2` and a point behind the panel sees `theta > π/2`.
/// Errors if `src` or `dst` coincides with the element.
pub fn directions<F: Real>(
    panel: &PanelGeometry<F>,
    m: usize,
    src: Point3<F>,
    dst: Point3<F>,
) -> Result<(Direction<F>, Direction<F>)> {
    let pos = panel.element_position(m);
    let arrival = direction_to(panel, pos, src, "src")?;
    let departure = direction_to(panel, pos, dst, "dst")?;
    Ok((arrival, departure))
}

fn direction_to<F: Real>(
    panel: &PanelGeometry<F>,
    from: Point3<F>,
    to: Point3<F>,
    what: &str,
) -> Result<Direction<F>> {
    let v = to.sub(from).normalized().ok_or_else(|| {
        Error::Degenerate(format!("{what} coincides with an element position"))
    })?;
    let cos_theta = v.dot(panel.normal).min(F::one()).max(-F::one());
    let (col_axis, row_axis) = panel.axes();
    let phi = wrap_angle(v.dot(row_axis).atan2(v.dot(col_axis)));
    Ok(Direction {
        theta: cos_theta.acos(),
        phi,
    })
}

/// Classifies which side of the panel plane `p` lies on.
///
/// Errors for points exactly on the plane, where neither branch of the
/// forwarding model applies.
pub fn side_of<F: Real>(panel: &PanelGeometry<F>, p: Point3<F>) -> Result<Side> {
    let d = panel.plane_distance(p);
    if d > F::zero() {
        Ok(Side::Reflective)
    } else if d < F::zero() {
        Ok(Side::Transmissive)
    } else {
        Err(Error::Degenerate(
            "point lies exactly on the panel plane".into(),
        ))
    }
}
