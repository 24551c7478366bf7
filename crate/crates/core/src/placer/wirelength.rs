//! Log-sum-exp smoothed wirelength.

use rayon::prelude::*;

use crate::netlist::{Circuit, Net, Placement};

pub use crate::netlist::hpwl;

/// Smoothed wirelength and its gradient with respect to every block center.
#[derive(Debug, Clone, PartialEq)]
pub struct LseWirelength {
    pub value: f64,
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
}

/// `gamma * ln sum e^{c/gamma} + gamma * ln sum e^{-c/gamma}` and its
/// derivatives for one axis, shifted by the extremes for stability.
fn axis(coords: &[f64], gamma: f64, grad: &mut [f64]) -> f64 {
    let hi = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = coords.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sp = 0.0;
    let mut sn = 0.0;
    for (g, &c) in grad.iter_mut().zip(coords) {
        let ep = ((c - hi) / gamma).exp();
        let en = ((lo - c) / gamma).exp();
        sp += ep;
        sn += en;
        *g = ep;
    }
    for (g, &c) in grad.iter_mut().zip(coords) {
        *g = *g / sp - ((lo - c) / gamma).exp() / sn;
    }
    hi - lo + gamma * (sp.ln() + sn.ln())
}

fn net_lse(net: &Net, placement: &Placement, gamma: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = net.pins.iter().map(|p| placement.x[p.block] + p.dx).collect();
    let ys: Vec<f64> = net.pins.iter().map(|p| placement.y[p.block] + p.dy).collect();
    let mut gx = vec![0.0; xs.len()];
    let mut gy = vec![0.0; ys.len()];
    let v = axis(&xs, gamma, &mut gx) + axis(&ys, gamma, &mut gy);
    (v, gx, gy)
}

/// Smoothed wirelength summed over nets, with the analytic gradient.
pub fn lse_wirelength(circuit: &Circuit, placement: &Placement, gamma: f64) -> LseWirelength {
    let per_net: Vec<_> = circuit.nets.par_iter().map(|net| net_lse(net, placement, gamma)).collect();
    let n = circuit.blocks.len();
    let mut out = LseWirelength { value: 0.0, grad_x: vec![0.0; n], grad_y: vec![0.0; n] };
    for (net, (v, gx, gy)) in circuit.nets.iter().zip(per_net) {
        out.value += v;
        for (k, p) in net.pins.iter().enumerate() {
            out.grad_x[p.block] += gx[k];
            out.grad_y[p.block] += gy[k];
        }
    }
    out
}
