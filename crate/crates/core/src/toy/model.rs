//! A small differentiable autoregressive categorical model over coordinate
//! tokens.
//!
//! Architecture: one shared single-hidden-layer encoder maps each element's
//! feature block to `h_j = tanh(W_enc·x_j + b_enc)` (weights shared across
//! elements, so every element of every screen trains the same cue reader).
//! The context at sequence position `i` is
//! `h_{elem(i)} + pos_bias[i] + Σ_{j<i} embed[j][t_j]`, where each position
//! owns an embedding table for the token emitted there; logits over the
//! vocabulary come from a per-position output head. Gradients are
//! hand-derived and exact, which keeps the model checkable against central
//! finite differences.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::sampler::RngStream;

/// Shape of one model instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    /// Width of one element's feature block (the encoder's fan-in).
    pub features_per_element: usize,
    /// Encoder width.
    pub hidden: usize,
    /// Token vocabulary size (100 for the coordinate codec; smaller in
    /// enumeration fixtures).
    pub n_tokens: usize,
    /// Sequence length: 4 coordinate slots per element.
    pub n_positions: usize,
}

impl ModelConfig {
    /// Elements covered by the sequence (4 positions each, last may be
    /// partial in reduced fixtures).
    pub fn n_elements(&self) -> usize {
        self.n_positions.div_ceil(4)
    }

    /// Total input feature length the model expects.
    pub fn n_features(&self) -> usize {
        self.features_per_element * self.n_elements()
    }

    fn embed_tables(&self) -> usize {
        // The last position's token is never consumed by a later context.
        self.n_positions.saturating_sub(1)
    }

    pub fn param_count(&self) -> usize {
        let ModelConfig {
            features_per_element,
            hidden,
            n_tokens,
            n_positions,
        } = *self;
        hidden * features_per_element
            + hidden
            + n_positions * hidden
            + self.embed_tables() * n_tokens * hidden
            + n_positions * n_tokens * hidden
            + n_positions * n_tokens
    }
}

/// Offsets of the named parameter segments inside the flat vector.
#[derive(Clone, Copy, Debug)]
struct Layout {
    w_enc: usize,
    b_enc: usize,
    pos_bias: usize,
    tok_embed: usize,
    w_out: usize,
    b_out: usize,
    total: usize,
}

impl Layout {
    fn of(cfg: &ModelConfig) -> Self {
        let w_enc = 0;
        let b_enc = w_enc + cfg.hidden * cfg.features_per_element;
        let pos_bias = b_enc + cfg.hidden;
        let tok_embed = pos_bias + cfg.n_positions * cfg.hidden;
        let w_out = tok_embed + cfg.embed_tables() * cfg.n_tokens * cfg.hidden;
        let b_out = w_out + cfg.n_positions * cfg.n_tokens * cfg.hidden;
        let total = b_out + cfg.n_positions * cfg.n_tokens;
        Self {
            w_enc,
            b_enc,
            pos_bias,
            tok_embed,
            w_out,
            b_out,
            total,
        }
    }
}

/// Parameters θ of the toy model, stored flat so optimizers and
/// finite-difference probes can treat them uniformly.
#[derive(Clone, Debug)]
pub struct ToyModel {
    cfg: ModelConfig,
    layout: Layout,
    params: Vec<f64>,
}

impl ToyModel {
    /// Random initialization, fan-in scaled: encoder rows `N(0, 1/√F)`,
    /// output heads `N(0, 1/√H)`, position biases and token embeddings at a
    /// small scale so early contexts are encoder-dominated.
    pub fn init(cfg: ModelConfig, rng: &mut RngStream) -> Self {
        let layout = Layout::of(&cfg);
        let mut params = vec![0.0; layout.total];
        let enc_scale = 1.0 / math::sqrt(cfg.features_per_element as f64);
        for p in &mut params[layout.w_enc..layout.b_enc] {
            *p = enc_scale * rng.standard_normal();
        }
        for p in &mut params[layout.pos_bias..layout.w_out] {
            *p = 0.05 * rng.standard_normal();
        }
        let out_scale = 1.0 / math::sqrt(cfg.hidden as f64);
        for p in &mut params[layout.w_out..layout.b_out] {
            *p = out_scale * rng.standard_normal();
        }
        Self {
            cfg,
            layout,
            params,
        }
    }

    /// All-zero parameters: uniform logits at every position.
    pub fn zeros(cfg: ModelConfig) -> Self {
        let layout = Layout::of(&cfg);
        Self {
            cfg,
            layout,
            params: vec![0.0; layout.total],
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// `(name, offset, len)` of each named parameter array, in layout order.
    pub fn param_layout(&self) -> Vec<(&'static str, usize, usize)> {
        let l = &self.layout;
        vec![
            ("w_enc", l.w_enc, l.b_enc - l.w_enc),
            ("b_enc", l.b_enc, l.pos_bias - l.b_enc),
            ("pos_bias", l.pos_bias, l.tok_embed - l.pos_bias),
            ("tok_embed", l.tok_embed, l.w_out - l.tok_embed),
            ("w_out", l.w_out, l.b_out - l.w_out),
            ("b_out", l.b_out, l.total - l.b_out),
        ]
    }

    pub fn sgd_step(&mut self, grad: &[f64], learning_rate: f64) {
        debug_assert_eq!(grad.len(), self.params.len());
        for (p, g) in self.params.iter_mut().zip(grad) {
            *p -= learning_rate * g;
        }
    }

    /// Per-element encodings, concatenated: `n_elements × hidden`.
    fn encode(&self, features: &[f64]) -> Vec<f64> {
        let (h, f) = (self.cfg.hidden, self.cfg.features_per_element);
        let n_elems = self.cfg.n_elements();
        debug_assert_eq!(features.len(), self.cfg.n_features());
        let w = &self.params[self.layout.w_enc..self.layout.b_enc];
        let b = &self.params[self.layout.b_enc..self.layout.pos_bias];
        let mut out = Vec::with_capacity(n_elems * h);
        for e in 0..n_elems {
            let x = &features[e * f..(e + 1) * f];
            for r in 0..h {
                let row = &w[r * f..(r + 1) * f];
                let z: f64 = b[r] + row.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>();
                out.push(math::tanh(z));
            }
        }
        out
    }

    fn context_into(&self, encodings: &[f64], acc: &[f64], position: usize, ctx: &mut [f64]) {
        let h = self.cfg.hidden;
        let elem = position / 4;
        let hvec = &encodings[elem * h..(elem + 1) * h];
        let pos = &self.params[self.layout.pos_bias + position * h..][..h];
        for i in 0..h {
            ctx[i] = hvec[i] + pos[i] + acc[i];
        }
    }

    fn logits_into(&self, ctx: &[f64], position: usize, logits: &mut [f64]) {
        let (h, v) = (self.cfg.hidden, self.cfg.n_tokens);
        let w = &self.params[self.layout.w_out + position * v * h..][..v * h];
        let b = &self.params[self.layout.b_out + position * v..][..v];
        for t in 0..v {
            let row = &w[t * h..(t + 1) * h];
            logits[t] = b[t] + row.iter().zip(ctx).map(|(wi, ci)| wi * ci).sum::<f64>();
        }
    }

    fn embed_of(&self, position: usize, token: usize) -> &[f64] {
        let (h, v) = (self.cfg.hidden, self.cfg.n_tokens);
        debug_assert!(position < self.cfg.embed_tables());
        debug_assert!(token < v);
        &self.params[self.layout.tok_embed + (position * v + token) * h..][..h]
    }

    /// Teacher-forced negative log-likelihood of a full token sequence:
    /// `−Σ_i ln p(t_i | x, t_<i)` in nats.
    pub fn nll(&self, features: &[f64], tokens: &[usize]) -> f64 {
        debug_assert_eq!(tokens.len(), self.cfg.n_positions);
        let (h, v, p) = (self.cfg.hidden, self.cfg.n_tokens, self.cfg.n_positions);
        let encodings = self.encode(features);
        let mut acc = vec![0.0; h];
        let mut ctx = vec![0.0; h];
        let mut logits = vec![0.0; v];
        let mut total = 0.0;
        for i in 0..p {
            if i > 0 {
                let e = self.embed_of(i - 1, tokens[i - 1]);
                for (a, ei) in acc.iter_mut().zip(e) {
                    *a += ei;
                }
            }
            self.context_into(&encodings, &acc, i, &mut ctx);
            self.logits_into(&ctx, i, &mut logits);
            total += log_sum_exp(&logits) - logits[tokens[i]];
        }
        total
    }

    /// Next-token distribution at position `prefix.len()` given a teacher
    /// prefix.
    pub fn position_probs(&self, features: &[f64], prefix: &[usize]) -> Vec<f64> {
        let i = prefix.len();
        debug_assert!(i < self.cfg.n_positions);
        let (h, v) = (self.cfg.hidden, self.cfg.n_tokens);
        let encodings = self.encode(features);
        let mut acc = vec![0.0; h];
        for (j, &t) in prefix.iter().enumerate() {
            let e = self.embed_of(j, t);
            for (a, ei) in acc.iter_mut().zip(e) {
                *a += ei;
            }
        }
        let mut ctx = vec![0.0; h];
        self.context_into(&encodings, &acc, i, &mut ctx);
        let mut logits = vec![0.0; v];
        self.logits_into(&ctx, i, &mut logits);
        let lse = log_sum_exp(&logits);
        logits.iter().map(|&z| math::exp(z - lse)).collect()
    }

    /// Accumulate `weight · ∂nll/∂θ` into `grad`; returns the (unweighted)
    /// nll. Exact backward pass for the forward above.
    pub fn accumulate_nll_grad(
        &self,
        features: &[f64],
        tokens: &[usize],
        weight: f64,
        grad: &mut [f64],
    ) -> f64 {
        debug_assert_eq!(grad.len(), self.params.len());
        debug_assert_eq!(tokens.len(), self.cfg.n_positions);
        let (h, v, p, f) = (
            self.cfg.hidden,
            self.cfg.n_tokens,
            self.cfg.n_positions,
            self.cfg.features_per_element,
        );
        let n_elems = self.cfg.n_elements();
        let encodings = self.encode(features);

        // Forward pass, caching per-position contexts and probabilities.
        let mut ctxs = vec![0.0; p * h];
        let mut probs = vec![0.0; p * v];
        let mut acc = vec![0.0; h];
        let mut logits = vec![0.0; v];
        let mut total = 0.0;
        for i in 0..p {
            if i > 0 {
                let e = self.embed_of(i - 1, tokens[i - 1]);
                for (a, ei) in acc.iter_mut().zip(e) {
                    *a += ei;
                }
            }
            let ctx = &mut ctxs[i * h..(i + 1) * h];
            self.context_into(&encodings, &acc, i, ctx);
            self.logits_into(ctx, i, &mut logits);
            let lse = log_sum_exp(&logits);
            total += lse - logits[tokens[i]];
            for (pr, &z) in probs[i * v..(i + 1) * v].iter_mut().zip(logits.iter()) {
                *pr = math::exp(z - lse);
            }
        }

        // Backward pass. `suffix` carries Σ_{i' >= i} dctx_{i'} for the
        // embedding gradients; `denc` collects each element's dctx sum.
        let mut suffix = vec![0.0; h];
        let mut denc = vec![0.0; n_elems * h];
        let mut dctx = vec![0.0; h];
        for i in (0..p).rev() {
            let ctx = &ctxs[i * h..(i + 1) * h];
            let du = &probs[i * v..(i + 1) * v];
            let target = tokens[i];

            let gw = self.layout.w_out + i * v * h;
            let gb = self.layout.b_out + i * v;
            let w = &self.params[gw..gw + v * h];
            dctx.iter_mut().for_each(|d| *d = 0.0);
            for t in 0..v {
                let delta = du[t] - f64::from(t == target);
                grad[gb + t] += weight * delta;
                let row = &w[t * h..(t + 1) * h];
                let grow = &mut grad[gw + t * h..gw + (t + 1) * h];
                for k in 0..h {
                    grow[k] += weight * delta * ctx[k];
                    dctx[k] += row[k] * delta;
                }
            }

            let gpos = self.layout.pos_bias + i * h;
            let elem = i / 4;
            for k in 0..h {
                grad[gpos + k] += weight * dctx[k];
                suffix[k] += dctx[k];
                denc[elem * h + k] += dctx[k];
            }
            if i > 0 {
                let ge = self.layout.tok_embed + ((i - 1) * v + tokens[i - 1]) * h;
                for k in 0..h {
                    grad[ge + k] += weight * suffix[k];
                }
            }
        }

        // Through the shared encoder: dz = (1 − h²) ⊙ dh, summed over the
        // element blocks because the weights are shared.
        for e in 0..n_elems {
            let x = &features[e * f..(e + 1) * f];
            for r in 0..h {
                let a = encodings[e * h + r];
                let dz = (1.0 - a * a) * denc[e * h + r];
                grad[self.layout.b_enc + r] += weight * dz;
                let grow = &mut grad[self.layout.w_enc + r * f..self.layout.w_enc + (r + 1) * f];
                for (g, &xi) in grow.iter_mut().zip(x) {
                    *g += weight * dz * xi;
                }
            }
        }
        total
    }

    /// Greedy decoding with self-generated prefixes: each position conditions
    /// on the model's own previous argmax tokens, not on ground truth. This
    /// is where exposure bias shows up at test time.
    pub fn greedy_decode(&self, features: &[f64]) -> Vec<usize> {
        let (h, v, p) = (self.cfg.hidden, self.cfg.n_tokens, self.cfg.n_positions);
        let encodings = self.encode(features);
        let mut acc = vec![0.0; h];
        let mut ctx = vec![0.0; h];
        let mut logits = vec![0.0; v];
        let mut tokens = Vec::with_capacity(p);
        for i in 0..p {
            if i > 0 {
                let e = self.embed_of(i - 1, tokens[i - 1]);
                for (a, ei) in acc.iter_mut().zip(e) {
                    *a += ei;
                }
            }
            self.context_into(&encodings, &acc, i, &mut ctx);
            self.logits_into(&ctx, i, &mut logits);
            let best = logits
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(t, _)| t)
                .unwrap_or(0);
            tokens.push(best);
        }
        tokens
    }
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + math::ln(logits.iter().map(|&z| math::exp(z - m)).sum::<f64>())
}
