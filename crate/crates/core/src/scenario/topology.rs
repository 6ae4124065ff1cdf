use std::f64::consts::TAU;

use rand::Rng;

use super::params::SimParams;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

/// Uniform point in a disk of radius `r` around `center` (radius law `r*sqrt(u)`).
pub fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, center: Point, r: f64) -> Point {
    let rad = r * rng.gen::<f64>().sqrt();
    let theta = TAU * rng.gen::<f64>();
    center + Point::new(rad * theta.cos(), rad * theta.sin())
}

/// Node positions of one cell. The BS sits at the origin.
///
/// VUE `i` is the transmitter of CVL `i`. NCVL `j` is anchored to VUE
/// `ncvl_anchor[j]`: it moves with that VUE and, when transmitters are
/// collocated, shares its position.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub cell_radius_m: f64,
    pub bs_position: Point,
    pub vue_positions: Vec<Point>,
    pub velocities: Vec<Point>,
    pub ncvl_tx_positions: Vec<Point>,
    pub ncvl_rx_positions: Vec<Point>,
    pub cluster_radius_m: Vec<f64>,
    pub ncvl_anchor: Vec<usize>,
    pub collocated: bool,
}

impl Topology {
    pub fn sample<R: Rng + ?Sized>(params: &SimParams, rng: &mut R) -> Self {
        let n = params.n_cvl;
        let m = params.n_ncvl;
        let radius = params.cell_radius_m;
        let vue_positions: Vec<Point> = (0..n).map(|_| uniform_in_disk(rng, Point::ORIGIN, radius)).collect();
        let velocities = (0..n)
            .map(|_| {
                let heading = TAU * rng.gen::<f64>();
                Point::new(heading.cos(), heading.sin()).scale(params.speed_mps)
            })
            .collect();
        let ncvl_anchor: Vec<usize> = (0..m).map(|j| j % n).collect();
        let [c_lo, c_hi] = params.cluster_radius_range_m;
        let mut ncvl_tx_positions = Vec::with_capacity(m);
        let mut ncvl_rx_positions = Vec::with_capacity(m);
        let mut cluster_radius_m = Vec::with_capacity(m);
        for &anchor in &ncvl_anchor {
            let tx = if params.collocate_ncvl_tx {
                vue_positions[anchor]
            } else {
                uniform_in_disk(rng, Point::ORIGIN, radius)
            };
            let rc = rng.gen_range(c_lo..=c_hi);
            // Rejection keeps the receiver uniform over the part of the
            // cluster disk that lies inside the cell.
            let rx = loop {
                let p = uniform_in_disk(rng, tx, rc);
                if p.norm() <= radius {
                    break p;
                }
            };
            ncvl_tx_positions.push(tx);
            ncvl_rx_positions.push(rx);
            cluster_radius_m.push(rc);
        }
        Self {
            cell_radius_m: radius,
            bs_position: Point::ORIGIN,
            vue_positions,
            velocities,
            ncvl_tx_positions,
            ncvl_rx_positions,
            cluster_radius_m,
            ncvl_anchor,
            collocated: params.collocate_ncvl_tx,
        }
    }

    pub fn n_cvl(&self) -> usize {
        self.vue_positions.len()
    }

    pub fn n_ncvl(&self) -> usize {
        self.ncvl_tx_positions.len()
    }

    pub fn cvl_tx(&self, i: usize) -> Point {
        self.vue_positions[i]
    }

    /// Checks the geometric invariants (tolerance `tol` meters).
    pub fn is_consistent(&self, tol: f64) -> bool {
        let r = self.cell_radius_m + tol;
        let inside = |p: &Point| p.dist(self.bs_position) <= r;
        self.vue_positions.iter().all(inside)
            && self.ncvl_tx_positions.iter().all(inside)
            && self.ncvl_rx_positions.iter().all(inside)
            && self.velocities.len() == self.n_cvl()
            && self.ncvl_rx_positions.len() == self.n_ncvl()
            && self.cluster_radius_m.len() == self.n_ncvl()
            && (0..self.n_ncvl()).all(|j| {
                self.ncvl_tx_positions[j].dist(self.ncvl_rx_positions[j]) <= self.cluster_radius_m[j] + tol
            })
    }
}
