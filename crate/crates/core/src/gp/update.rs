//! One gradient-projection slot update.

use super::BlockedSets;
use crate::marginals::MarginalState;
use crate::model::{Network, Slot, Strategy};

/// Moves mass from non-minimal directions toward the minimum modified
/// marginal of every row.
///
/// Non-minimal entries shrink by `min(value, alpha * e)` where `e` is the
/// excess over the row minimum; blocked hops are emptied; the minimizing
/// direction absorbs the difference. Rows without traffic are steered
/// entirely to their minimizing direction. `ci_t`/`di_t` are the traffic
/// estimates the marginals were computed from.
pub fn gp_slot_update(
    net: &Network,
    s: &Strategy,
    ms: &MarginalState,
    blocked: &BlockedSets,
    ci_t: &[f64],
    di_t: &[f64],
    alpha: f64,
) -> Strategy {
    let n = net.n();
    let mut out = s.clone();
    for c in 0..net.n_ci() {
        for i in 0..n {
            let idx = c * n + i;
            let row = net.ci_row(c, i);
            let target = match ms.ci_argmin[idx].expect("every CI row has a minimum") {
                Slot::Local => Some(0),
                Slot::Cache => None,
                Slot::Neighbor(j) => Some(1 + net.topology.neighbors(i).binary_search(&j).unwrap()),
            };
            update_row(
                &mut out.ci_phi[row.clone()],
                &mut out.ci_y[idx],
                &ms.ci_delta[row.clone()],
                ms.ci_gamma[idx],
                ms.ci_min[idx],
                &blocked.ci[row],
                target,
                ci_t[idx] > 0.0,
                alpha,
            );
        }
    }
    for k in 0..net.n_di() {
        for i in 0..n {
            if net.server(k, i) {
                continue;
            }
            let idx = k * n + i;
            let row = net.di_row(k, i);
            let target = match ms.di_argmin[idx].expect("non-server DI rows have a minimum") {
                Slot::Cache => None,
                Slot::Neighbor(j) => Some(net.topology.neighbors(i).binary_search(&j).unwrap()),
                Slot::Local => unreachable!("data interests are never computed"),
            };
            update_row(
                &mut out.di_phi[row.clone()],
                &mut out.di_y[idx],
                &ms.di_delta[row.clone()],
                ms.di_gamma[idx],
                ms.di_min[idx],
                &blocked.di[row],
                target,
                di_t[idx] > 0.0,
                alpha,
            );
        }
    }
    out
}

/// Updates one row in place. `target` is the minimizing forwarding slot, or
/// `None` when caching attains the minimum.
#[allow(clippy::too_many_arguments)]
pub(crate) fn update_row(
    phi: &mut [f64],
    y: &mut f64,
    delta: &[f64],
    gamma: f64,
    min: f64,
    blocked: &[bool],
    target: Option<usize>,
    has_traffic: bool,
    alpha: f64,
) {
    if !has_traffic {
        phi.iter_mut().for_each(|p| *p = 0.0);
        *y = 0.0;
        match target {
            Some(q) => phi[q] = 1.0,
            None => *y = 1.0,
        }
        return;
    }
    let mut moved = 0.0;
    for q in 0..phi.len() {
        if Some(q) == target {
            continue;
        }
        let dec = if blocked[q] {
            phi[q]
        } else {
            let e = delta[q] - min;
            if e > 0.0 { phi[q].min(alpha * e) } else { 0.0 }
        };
        phi[q] -= dec;
        moved += dec;
    }
    if target.is_some() {
        let e = gamma - min;
        if e > 0.0 {
            let dec = y.min(alpha * e);
            *y -= dec;
            moved += dec;
        }
    }
    match target {
        Some(q) => phi[q] = (phi[q] + moved).min(1.0),
        None => *y = (*y + moved).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn competitor_shrinks_target_grows() {
        let mut phi = [0.8, 0.2];
        let mut y = 0.0;
        update_row(&mut phi, &mut y, &[1.0, 1.5], 10.0, 1.0, &[false, false], Some(0), true, 0.01);
        assert!((phi[1] - 0.195).abs() < 1e-15);
        assert!((phi[0] - 0.805).abs() < 1e-15);
        assert_eq!(y, 0.0);
    }

    #[test]
    fn cheap_cache_absorbs_forwarding() {
        let mut phi = [0.5, 0.5];
        let mut y = 0.0;
        update_row(&mut phi, &mut y, &[2.0, 3.0], 1.0, 1.0, &[false, false], None, true, 0.1);
        assert!((phi[0] - 0.4).abs() < 1e-15 && (phi[1] - 0.3).abs() < 1e-15);
        assert!((y - 0.3).abs() < 1e-15);
    }

    #[test]
    fn stationary_row_is_unchanged() {
        let mut phi = [0.3, 0.7];
        let mut y = 0.0;
        update_row(&mut phi, &mut y, &[1.0, 1.0], 5.0, 1.0, &[false, false], Some(0), true, 0.5);
        assert_eq!(phi, [0.3, 0.7]);
    }

    #[test]
    fn blocked_mass_moves_and_idle_rows_snap() {
        let mut phi = [0.0, 0.6, 0.4];
        let mut y = 0.0;
        update_row(&mut phi, &mut y, &[1.0, 0.5, 2.0], 9.0, 1.0, &[false, true, false], Some(0), true, 0.01);
        assert_eq!(phi[1], 0.0);
        assert!((phi.iter().sum::<f64>() - 1.0).abs() < 1e-15);

        let mut phi = [0.2, 0.3, 0.0];
        let mut y = 0.5;
        update_row(&mut phi, &mut y, &[1.0, 0.5, 2.0], f64::INFINITY, 0.5, &[false; 3], Some(1), false, 0.01);
        assert_eq!((phi, y), ([0.0, 1.0, 0.0], 0.0));
    }
}
