//! Straight-line VUE mobility inside the cell.

use super::topology::{Point, Topology};

/// Largest `s >= 0` with `|q + s*d| <= radius`, for `q` inside the disk.
fn exit_time(q: Point, d: Point, radius: f64) -> f64 {
    let dd = d.dot(d);
    if dd == 0.0 {
        return f64::INFINITY;
    }
    let qd = q.dot(d);
    let c = (radius * radius - q.dot(q)).max(0.0);
    (-qd + (qd * qd + dd * c).sqrt()) / dd
}

/// Moves `pos` with velocity `vel` for `dt` seconds, reflecting specularly
/// off the cell boundary. Returns the new position and velocity.
fn reflect_move(mut pos: Point, mut vel: Point, dt: f64, radius: f64) -> (Point, Point) {
    let mut remaining = dt;
    for _ in 0..10_000 {
        let s = exit_time(pos, vel, radius);
        if s >= remaining {
            pos = pos + vel.scale(remaining);
            break;
        }
        pos = pos + vel.scale(s);
        let n = pos.scale(1.0 / pos.norm());
        vel = vel - n.scale(2.0 * vel.dot(n));
        remaining -= s;
    }
    // Guard against round-off pushing the point a hair outside.
    let r = pos.norm();
    if r > radius {
        pos = pos.scale(radius / r);
    }
    (pos, vel)
}

/// Advances every VUE by `velocity * dt` with reflection at the cell edge.
///
/// Each NCVL follows its anchor VUE rigidly. A pair that would leave the
/// cell stops at the boundary; collocated transmitters stay on the VUE and
/// the receiver offset is shortened as needed to stay inside. Channel gains
/// are not touched and must be recomposed by the caller.
pub fn advance_mobility(topology: &Topology, dt: f64) -> Topology {
    let mut next = topology.clone();
    if dt == 0.0 {
        return next;
    }
    let radius = topology.cell_radius_m;
    let mut displacement = vec![Point::ORIGIN; topology.n_cvl()];
    for i in 0..topology.n_cvl() {
        let (p, v) = reflect_move(topology.vue_positions[i], topology.velocities[i], dt, radius);
        displacement[i] = p - topology.vue_positions[i];
        next.vue_positions[i] = p;
        next.velocities[i] = v;
    }
    for j in 0..topology.n_ncvl() {
        let anchor = topology.ncvl_anchor[j];
        let tx = topology.ncvl_tx_positions[j];
        let rx = topology.ncvl_rx_positions[j];
        if topology.collocated {
            let new_tx = next.vue_positions[anchor];
            let offset = rx - tx;
            let s = exit_time(new_tx, offset, radius).min(1.0);
            next.ncvl_tx_positions[j] = new_tx;
            next.ncvl_rx_positions[j] = new_tx + offset.scale(s);
        } else {
            let d = displacement[anchor];
            let s = exit_time(tx, d, radius).min(exit_time(rx, d, radius)).min(1.0);
            next.ncvl_tx_positions[j] = tx + d.scale(s);
            next.ncvl_rx_positions[j] = rx + d.scale(s);
        }
    }
    next
}

/// Snapshot instants `k * t_max / L` for `k = 0..L`.
pub fn snapshot_times(t_max: f64, snapshots: usize) -> Vec<f64> {
    (0..snapshots).map(|k| k as f64 * t_max / snapshots as f64).collect()
}
