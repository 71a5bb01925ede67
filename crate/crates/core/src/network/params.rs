//! Parameter inventory, initialization, and graph binding.

use std::collections::HashMap;

use crate::autograd::{Graph, NodeId, Params, Tensor};
use crate::rng::Rng;

/// Model dimensions and regularization knobs.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HyperParams {
    pub d_emb: usize,
    pub d_hid: usize,
    pub dropout: f64,
    /// Half-width of the uniform embedding initialization.
    pub emb_scale: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams { d_emb: 32, d_hid: 64, dropout: 0.3, emb_scale: 0.1 }
    }
}

/// The six recurrent cells, by parameter-name prefix.
const GRUS: [(&str, Dims); 6] = [
    ("enc_fwd", Dims::EmbToHid),
    ("enc_bwd", Dims::EmbToHid),
    ("ent", Dims::BiToHid),
    ("dec1", Dims::EmbToHid),
    ("dec2", Dims::BiToHid),
    ("sess", Dims::HidToHid),
];

#[derive(Clone, Copy)]
enum Dims {
    EmbToHid,
    BiToHid,
    HidToHid,
}

impl Dims {
    fn input(self, h: &HyperParams) -> usize {
        match self {
            Dims::EmbToHid => h.d_emb,
            Dims::BiToHid => 2 * h.d_hid,
            Dims::HidToHid => h.d_hid,
        }
    }
}

fn uniform_matrix(rng: &mut Rng, rows: usize, cols: usize, scale: f64) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.uniform(-scale, scale)).collect();
    Tensor::new(vec![rows, cols], data)
}

fn uniform_vector(rng: &mut Rng, len: usize, scale: f64) -> Tensor {
    Tensor::vector((0..len).map(|_| rng.uniform(-scale, scale)).collect())
}

/// Fresh parameters for a model over a `vocab`-word vocabulary.  Weight
/// matrices draw from U(±1/√fan_in), biases start at zero, and the
/// embedding table draws from U(±emb_scale).
pub fn init_params(hyper: &HyperParams, vocab: usize, seed: u64) -> Params {
    assert!(vocab > 0 && hyper.d_emb > 0 && hyper.d_hid > 0);
    let mut rng = Rng::new(seed);
    let mut params = Params::new();
    let h = hyper.d_hid;

    params.insert("emb", uniform_matrix(&mut rng, vocab, hyper.d_emb, hyper.emb_scale));

    for (prefix, dims) in GRUS {
        let d_in = dims.input(hyper);
        let win = 1.0 / (d_in as f64).sqrt();
        let whid = 1.0 / (h as f64).sqrt();
        for gate in ["z", "r", "h"] {
            params.insert(&format!("{prefix}.w_{gate}"), uniform_matrix(&mut rng, d_in, h, win));
            params.insert(&format!("{prefix}.u_{gate}"), uniform_matrix(&mut rng, h, h, whid));
            params.insert(&format!("{prefix}.b_{gate}"), Tensor::zeros(&[h]));
        }
    }

    let wbi = 1.0 / (2.0 * h as f64).sqrt();
    let wh = 1.0 / (h as f64).sqrt();
    let wtri = 1.0 / (3.0 * h as f64).sqrt();

    params.insert("att.w_query", uniform_matrix(&mut rng, h, h, wh));
    params.insert("att.w_keys", uniform_matrix(&mut rng, 2 * h, h, wbi));
    params.insert("att.b", Tensor::zeros(&[h]));
    params.insert("att.v", uniform_vector(&mut rng, h, wh));

    for head in ["shortlist", "switch"] {
        params.insert(&format!("{head}.w1"), uniform_matrix(&mut rng, 3 * h, h, wtri));
        params.insert(&format!("{head}.b1"), Tensor::zeros(&[h]));
    }
    params.insert("shortlist.w2", uniform_matrix(&mut rng, h, vocab, wh));
    params.insert("shortlist.b2", Tensor::zeros(&[vocab]));
    params.insert("switch.w2", uniform_matrix(&mut rng, h, 1, wh));
    params.insert("switch.b2", Tensor::zeros(&[1]));

    for proj in ["init_proj", "q1_proj"] {
        params.insert(&format!("{proj}.w"), uniform_matrix(&mut rng, 3 * h, h, wtri));
        params.insert(&format!("{proj}.b"), Tensor::zeros(&[h]));
    }
    params
}

/// One GRU cell's bound weights.
#[derive(Clone, Copy)]
pub struct Gru {
    pub w_z: NodeId,
    pub u_z: NodeId,
    pub b_z: NodeId,
    pub w_r: NodeId,
    pub u_r: NodeId,
    pub b_r: NodeId,
    pub w_h: NodeId,
    pub u_h: NodeId,
    pub b_h: NodeId,
}

/// All parameters bound into one graph, addressable by name.
pub struct Bound {
    pub hyper: HyperParams,
    map: HashMap<String, NodeId>,
}

impl Bound {
    pub fn new(g: &mut Graph, params: &Params, hyper: HyperParams) -> Bound {
        Bound { hyper, map: params.bind_all(g) }
    }

    pub fn get(&self, name: &str) -> NodeId {
        *self.map.get(name).unwrap_or_else(|| panic!("no bound parameter named {name:?}"))
    }

    pub fn gru(&self, prefix: &str) -> Gru {
        let n = |suffix: &str| self.get(&format!("{prefix}.{suffix}"));
        Gru {
            w_z: n("w_z"),
            u_z: n("u_z"),
            b_z: n("b_z"),
            w_r: n("w_r"),
            u_r: n("u_r"),
            b_r: n("b_r"),
            w_h: n("w_h"),
            u_h: n("u_h"),
            b_h: n("b_h"),
        }
    }

    pub fn vocab_size(&self, g: &Graph) -> usize {
        g.value(self.get("emb")).rows()
    }
}

/// One GRU step: update gate `z`, reset gate `r`, candidate `h̃`, and
/// `h = (1 − z) ∘ h_prev + z ∘ h̃`.
pub fn gru_cell(g: &mut Graph, p: &Gru, x: NodeId, h_prev: NodeId) -> NodeId {
    let gate = |g: &mut Graph, w, u, b| {
        let xa = g.matmul(x, w);
        let ha = g.matmul(h_prev, u);
        let s = g.add(xa, ha);
        g.add(s, b)
    };
    let z_pre = gate(g, p.w_z, p.u_z, p.b_z);
    let z = g.sigmoid(z_pre);
    let r_pre = gate(g, p.w_r, p.u_r, p.b_r);
    let r = g.sigmoid(r_pre);

    let xa = g.matmul(x, p.w_h);
    let rh = g.mul(r, h_prev);
    let ra = g.matmul(rh, p.u_h);
    let s = g.add(xa, ra);
    let pre = g.add(s, p.b_h);
    let cand = g.tanh(pre);

    let keep = g.one_minus(z);
    let old = g.mul(keep, h_prev);
    let new = g.mul(z, cand);
    g.add(old, new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_is_complete_and_sized() {
        let hyper = HyperParams { d_emb: 3, d_hid: 4, dropout: 0.0, emb_scale: 0.1 };
        let params = init_params(&hyper, 7, 0);
        assert_eq!(params.get("emb").shape(), &[7, 3]);
        assert_eq!(params.get("enc_fwd.w_z").shape(), &[3, 4]);
        assert_eq!(params.get("ent.w_r").shape(), &[8, 4]);
        assert_eq!(params.get("dec2.w_h").shape(), &[8, 4]);
        assert_eq!(params.get("sess.u_h").shape(), &[4, 4]);
        assert_eq!(params.get("att.w_keys").shape(), &[8, 4]);
        assert_eq!(params.get("shortlist.w2").shape(), &[4, 7]);
        assert_eq!(params.get("switch.w2").shape(), &[4, 1]);
        assert_eq!(params.get("init_proj.w").shape(), &[12, 4]);
        // Biases start at zero, weights do not.
        assert!(params.get("dec1.b_z").data().iter().all(|&v| v == 0.0));
        assert!(params.get("dec1.w_z").data().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn init_is_seed_deterministic() {
        let hyper = HyperParams::default();
        let a = init_params(&hyper, 11, 5);
        let b = init_params(&hyper, 11, 5);
        let c = init_params(&hyper, 11, 6);
        assert_eq!(a.get("emb").data(), b.get("emb").data());
        assert_ne!(a.get("emb").data(), c.get("emb").data());
    }

    #[test]
    fn gru_cell_with_zero_weights_decays_toward_zero() {
        let hyper = HyperParams { d_emb: 2, d_hid: 3, dropout: 0.0, emb_scale: 0.1 };
        let mut zeroed = init_params(&hyper, 4, 0);
        for (_, t) in zeroed.iter_mut() {
            t.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
        let mut g = Graph::new(0);
        let bound = Bound::new(&mut g, &zeroed, hyper);
        let gru = bound.gru("enc_fwd");
        let x = g.leaf(Tensor::vector(vec![1.0, -2.0]));
        let h0 = g.leaf(Tensor::vector(vec![0.8, 0.8, 0.8]));
        // z = r = σ(0) = ½ and the candidate is tanh(0) = 0, so each step
        // halves the previous state.
        let h1 = gru_cell(&mut g, &gru, x, h0);
        assert_eq!(g.value(h1).data(), &[0.4, 0.4, 0.4]);
        let h2 = gru_cell(&mut g, &gru, x, h1);
        assert_eq!(g.value(h2).data(), &[0.2, 0.2, 0.2]);
    }

    #[test]
    fn gru_cell_copies_input_when_gates_saturate() {
        // Scalar cell with z ≈ 1 (huge update bias), w_h = 1, u_h = 0:
        // the new state is tanh(x) regardless of the previous state.
        let hyper = HyperParams { d_emb: 1, d_hid: 1, dropout: 0.0, emb_scale: 0.1 };
        let mut p = init_params(&hyper, 2, 0);
        for (_, t) in p.iter_mut() {
            t.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
        p.get_mut("enc_fwd.b_z").data_mut()[0] = 1e3;
        p.get_mut("enc_fwd.w_h").data_mut()[0] = 1.0;
        let mut g = Graph::new(0);
        let bound = Bound::new(&mut g, &p, hyper);
        let gru = bound.gru("enc_fwd");
        let x = g.leaf(Tensor::vector(vec![0.5]));
        let h0 = g.leaf(Tensor::vector(vec![-0.9]));
        let h1 = gru_cell(&mut g, &gru, x, h0);
        let got = g.value(h1).data()[0];
        assert!((got - 0.5f64.tanh()).abs() < 1e-12, "got {got}");
    }
}
