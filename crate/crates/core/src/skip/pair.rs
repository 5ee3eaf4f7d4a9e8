use crate::ble::NetworkConfig;

use super::{predict, GammaProcess, SkipPrediction};

/// Current reference point of an (interferer, NoI) pair: the connection
/// events of both networks the last prediction was made from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairState {
    pub network: u32,
    pub net_index: u64,
    pub noi_index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairPrediction {
    pub gamma: GammaProcess,
    pub prediction: SkipPrediction,
    /// `t_L − t_H` at the reference point.
    pub phi: i64,
    /// Connection events for the interferer and the NoI to advance.
    /// `None` if the pair never overlaps again.
    pub steps: Option<(u64, u64)>,
}

/// Overlap window of a pair: the longer of the two connection events.
pub fn pair_window(net: &NetworkConfig, noi: &NetworkConfig) -> i64 {
    net.shape().duration().max(noi.shape().duration()) as i64
}

/// Predicts the next point of the pair. The network with the longer
/// interval plays H; on a tie the NoI plays L.
pub fn predict_pair(state: &PairState, net: &NetworkConfig, noi: &NetworkConfig) -> PairPrediction {
    let d = pair_window(net, noi);
    let t_net = net.anchor(state.net_index).0 as i64;
    let t_noi = noi.anchor(state.noi_index).0 as i64;
    let noi_is_high = noi.interval > net.interval;
    let (phi, t_l, t_h) = if noi_is_high {
        (t_net - t_noi, net.interval, noi.interval)
    } else {
        (t_noi - t_net, noi.interval, net.interval)
    };
    let (gamma, prediction) = predict(phi, t_l, t_h, d);
    let steps = prediction.counts().map(|(k_l, k_h)| {
        if noi_is_high {
            (k_l, k_h)
        } else {
            (k_h, k_l)
        }
    });
    PairPrediction {
        gamma,
        prediction,
        phi,
        steps,
    }
}
