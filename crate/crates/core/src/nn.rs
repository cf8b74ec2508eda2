//! Dense feed-forward networks trained on a sum-of-squared-error index.
//!
//! Layer `l` computes `N = W a + b` followed by an element-wise transfer
//! function. Weights are stored row-major with shape `(neurons, inputs)`.
//!
//! Parameters are flattened in one canonical order used everywhere a network
//! is handled as a plain vector (bee colony food sources, GA chromosomes,
//! gradients): layer by layer from the input side, and within each layer the
//! weights row-major followed by the biases.

use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferFunction {
    Logistic,
    Linear,
}

impl TransferFunction {
    #[inline]
    pub fn value(self, n: f64) -> f64 {
        match self {
            TransferFunction::Logistic => 1.0 / (1.0 + (-n).exp()),
            TransferFunction::Linear => n,
        }
    }

    #[inline]
    pub fn derivative(self, n: f64) -> f64 {
        match self {
            TransferFunction::Logistic => {
                let f = self.value(n);
                f * (1.0 - f)
            }
            TransferFunction::Linear => 1.0,
        }
    }
}

/// Weights, biases and transfer function of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    neurons: usize,
    inputs: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    transfer: TransferFunction,
}

impl LayerParams {
    pub fn new(
        neurons: usize,
        inputs: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        transfer: TransferFunction,
    ) -> Result<Self> {
        if neurons == 0 || inputs == 0 {
            return Err(Error::shape("layer dimensions must be > 0"));
        }
        if weights.len() != neurons * inputs {
            return Err(Error::shape(format!(
                "weights length {} does not match {neurons}x{inputs}",
                weights.len()
            )));
        }
        if biases.len() != neurons {
            return Err(Error::shape(format!(
                "biases length {} does not match {neurons} neurons",
                biases.len()
            )));
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::NumericOverflow("non-finite layer parameter".into()));
        }
        Ok(Self {
            neurons,
            inputs,
            weights,
            biases,
            transfer,
        })
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn transfer(&self) -> TransferFunction {
        self.transfer
    }

    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.inputs + col]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Layer sizes plus transfer functions; enough to rebuild a [`Network`] from
/// a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    /// `[inputs, hidden.., outputs]`
    pub sizes: Vec<usize>,
    pub hidden_transfer: TransferFunction,
    pub output_transfer: TransferFunction,
}

impl Architecture {
    /// Logistic units throughout.
    pub fn new(inputs: usize, hidden: &[usize], outputs: usize) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(inputs);
        sizes.extend_from_slice(hidden);
        sizes.push(outputs);
        Self::with_transfers(sizes, TransferFunction::Logistic, TransferFunction::Logistic)
    }

    pub fn with_transfers(
        sizes: Vec<usize>,
        hidden_transfer: TransferFunction,
        output_transfer: TransferFunction,
    ) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::config("an architecture needs at least an input and an output size"));
        }
        if sizes.contains(&0) {
            return Err(Error::config(format!("layer sizes must be > 0, got {sizes:?}")));
        }
        Ok(Self {
            sizes,
            hidden_transfer,
            output_transfer,
        })
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn transfer_for(&self, layer: usize) -> TransferFunction {
        if layer + 1 == self.layer_count() {
            self.output_transfer
        } else {
            self.hidden_transfer
        }
    }

    /// Builds a network from parameters in canonical order.
    pub fn network(&self, params: &[f64]) -> Result<Network> {
        if params.len() != self.param_count() {
            return Err(Error::shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let mut offset = 0;
        let mut layers = Vec::with_capacity(self.layer_count());
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (inputs, neurons) = (w[0], w[1]);
            let weights = params[offset..offset + neurons * inputs].to_vec();
            offset += neurons * inputs;
            let biases = params[offset..offset + neurons].to_vec();
            offset += neurons;
            layers.push(LayerParams::new(neurons, inputs, weights, biases, self.transfer_for(l))?);
        }
        Network::new(layers)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<LayerParams>,
}

/// Net inputs and activations of every layer for one sample.
///
/// `activations[0]` is the input sample and `activations[l + 1]` is the
/// output of `layers[l]`; `net_inputs[l]` is the pre-transfer vector of
/// `layers[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub net_inputs: Vec<Vec<f64>>,
    pub activations: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace always holds the input")
    }
}

impl Network {
    pub fn new(layers: Vec<LayerParams>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::shape("a network needs at least one layer"));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[1].inputs != pair[0].neurons {
                return Err(Error::shape(format!(
                    "layer {} expects {} inputs but layer {} has {} neurons",
                    l + 1,
                    pair[1].inputs,
                    l,
                    pair[0].neurons
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().neurons
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(LayerParams::param_count).sum()
    }

    /// Flattens parameters in canonical order.
    pub fn to_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.biases);
        }
        out
    }

    /// Same topology and transfer functions, new parameters.
    pub fn with_params(&self, params: &[f64]) -> Result<Network> {
        if params.len() != self.param_count() {
            return Err(Error::shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let mut offset = 0;
        let mut layers = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let nw = layer.weights.len();
            let nb = layer.biases.len();
            layers.push(LayerParams::new(
                layer.neurons,
                layer.inputs,
                params[offset..offset + nw].to_vec(),
                params[offset + nw..offset + nw + nb].to_vec(),
                layer.transfer,
            )?);
            offset += nw + nb;
        }
        Network::new(layers)
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        if x.len() != self.input_width() {
            return Err(Error::shape(format!(
                "sample has {} features, network expects {}",
                x.len(),
                self.input_width()
            )));
        }
        let mut net_inputs = Vec::with_capacity(self.layers.len());
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let a_prev = &activations[l];
            let mut n = layer.biases.clone();
            for (row, n_row) in n.iter_mut().enumerate() {
                let w = &layer.weights[row * layer.inputs..(row + 1) * layer.inputs];
                *n_row += w.iter().zip(a_prev).map(|(w, a)| w * a).sum::<f64>();
            }
            let a: Vec<f64> = n.iter().map(|&v| layer.transfer.value(v)).collect();
            if n.iter().chain(&a).any(|v| !v.is_finite()) {
                return Err(Error::NumericOverflow(format!("non-finite activation in layer {l}")));
            }
            net_inputs.push(n);
            activations.push(a);
        }
        Ok(ForwardTrace {
            net_inputs,
            activations,
        })
    }

    /// Final-layer output for one sample.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut trace = self.forward(x)?;
        Ok(trace.activations.pop().unwrap())
    }
}

/// `(t - p)ᵀ(t - p)` for one sample.
pub fn sample_sse(target: &[f64], prediction: &[f64]) -> Result<f64> {
    if target.len() != prediction.len() {
        return Err(Error::shape(format!(
            "target has {} entries, prediction has {}",
            target.len(),
            prediction.len()
        )));
    }
    Ok(target
        .iter()
        .zip(prediction)
        .map(|(t, p)| (t - p) * (t - p))
        .sum())
}

fn check_compat(net: &Network, data: &Dataset) -> Result<()> {
    if data.n_features() != net.input_width() {
        return Err(Error::shape(format!(
            "dataset has {} features, network expects {}",
            data.n_features(),
            net.input_width()
        )));
    }
    if data.n_classes() != net.output_width() {
        return Err(Error::shape(format!(
            "dataset has {} classes, network emits {}",
            data.n_classes(),
            net.output_width()
        )));
    }
    Ok(())
}

/// Sum of [`sample_sse`] over every row, accumulated in row order.
pub fn total_sse(net: &Network, data: &Dataset) -> Result<f64> {
    check_compat(net, data)?;
    let mut total = 0.0;
    for i in 0..data.len() {
        let p = net.predict(data.features_row(i))?;
        total += sample_sse(data.target_row(i), &p)?;
    }
    if !total.is_finite() {
        return Err(Error::NumericOverflow("sum of squared error is not finite".into()));
    }
    Ok(total)
}

/// `S^L = -2 F'(N^L) ∘ (t - a^L)`.
///
/// The negative sign makes `W - η S aᵀ` a descent step on the squared error.
pub fn output_sensitivity(net: &Network, trace: &ForwardTrace, target: &[f64]) -> Result<Vec<f64>> {
    let last = net.layers.len() - 1;
    let layer = &net.layers[last];
    let (Some(n), Some(a)) = (trace.net_inputs.get(last), trace.activations.get(last + 1)) else {
        return Err(Error::shape("trace does not cover the output layer"));
    };
    if target.len() != layer.neurons || n.len() != layer.neurons || a.len() != layer.neurons {
        return Err(Error::shape(format!(
            "target width {} does not match output width {}",
            target.len(),
            layer.neurons
        )));
    }
    Ok(n.iter()
        .zip(a)
        .zip(target)
        .map(|((&n, &a), &t)| -2.0 * layer.transfer.derivative(n) * (t - a))
        .collect())
}

/// `S^l = F'(N^l) ∘ (W^{l+1})ᵀ S^{l+1}` for hidden layer `l`, where
/// `next_layer` is `layers[l + 1]`.
pub fn backprop_sensitivity(
    next_layer: &LayerParams,
    s_next: &[f64],
    trace: &ForwardTrace,
    transfer: TransferFunction,
    l: usize,
) -> Result<Vec<f64>> {
    let n = trace
        .net_inputs
        .get(l)
        .ok_or_else(|| Error::shape(format!("trace has no layer {l}")))?;
    if s_next.len() != next_layer.neurons || n.len() != next_layer.inputs {
        return Err(Error::shape(format!(
            "sensitivity of width {} and net input of width {} do not fit a {}x{} layer",
            s_next.len(),
            n.len(),
            next_layer.neurons,
            next_layer.inputs
        )));
    }
    let mut s = vec![0.0; next_layer.inputs];
    for (row, &sr) in s_next.iter().enumerate() {
        let w = &next_layer.weights[row * next_layer.inputs..(row + 1) * next_layer.inputs];
        for (acc, &wv) in s.iter_mut().zip(w) {
            *acc += wv * sr;
        }
    }
    for (acc, &nv) in s.iter_mut().zip(n) {
        *acc *= transfer.derivative(nv);
    }
    Ok(s)
}

/// Gradient of [`total_sse`] with respect to every parameter, in canonical
/// order, assembled from layer sensitivities summed over all rows.
pub fn gradient(net: &Network, data: &Dataset) -> Result<Vec<f64>> {
    check_compat(net, data)?;
    let offsets: Vec<usize> = net
        .layers
        .iter()
        .scan(0, |acc, layer| {
            let start = *acc;
            *acc += layer.param_count();
            Some(start)
        })
        .collect();
    let mut grad = vec![0.0; net.param_count()];
    for i in 0..data.len() {
        let trace = net.forward(data.features_row(i))?;
        let mut s = output_sensitivity(net, &trace, data.target_row(i))?;
        for l in (0..net.layers.len()).rev() {
            let layer = &net.layers[l];
            let a_prev = &trace.activations[l];
            let base = offsets[l];
            for (row, &sr) in s.iter().enumerate() {
                let g = &mut grad[base + row * layer.inputs..base + (row + 1) * layer.inputs];
                for (gv, &av) in g.iter_mut().zip(a_prev) {
                    *gv += sr * av;
                }
            }
            let bias_base = base + layer.weights.len();
            for (gv, &sr) in grad[bias_base..bias_base + layer.neurons].iter_mut().zip(&s) {
                *gv += sr;
            }
            if l > 0 {
                s = backprop_sensitivity(layer, &s, &trace, net.layers[l - 1].transfer, l - 1)?;
            }
        }
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NumericOverflow("non-finite gradient".into()));
    }
    Ok(grad)
}

/// One full-batch gradient-descent update: `θ ← θ - η ∇SSE`.
pub fn bp_step(net: &Network, data: &Dataset, eta: f64) -> Result<Network> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::config(format!("learning rate must be finite and >= 0, got {eta}")));
    }
    let grad = gradient(net, data)?;
    let params: Vec<f64> = net
        .to_params()
        .iter()
        .zip(&grad)
        .map(|(p, g)| p - eta * g)
        .collect();
    net.with_params(&params)
}

/// One pass over the rows in the given order, applying the per-sample
/// update `W ← W - η S aᵀ`, `b ← b - η S` after every row.
pub fn bp_epoch_online(net: &Network, data: &Dataset, eta: f64, order: &[usize]) -> Result<Network> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::config(format!("learning rate must be finite and >= 0, got {eta}")));
    }
    check_compat(net, data)?;
    let mut current = net.clone();
    for &i in order {
        if i >= data.len() {
            return Err(Error::shape(format!("row {i} out of range")));
        }
        current = bp_step(&current, &data.select(&[i]), eta)?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(w: f64, b: f64, transfer: TransferFunction) -> Network {
        Network::new(vec![LayerParams::new(1, 1, vec![w], vec![b], transfer).unwrap()]).unwrap()
    }

    fn one_row(x: f64, t: f64) -> Dataset {
        Dataset::from_rows("t", vec![vec![x]], vec![vec![t]]).unwrap()
    }

    #[test]
    fn logistic_of_zero_is_half() {
        let net = single(0.0, 0.0, TransferFunction::Logistic);
        for x in [-3.0, 0.0, 12.5] {
            assert_eq!(net.predict(&[x]).unwrap(), vec![0.5]);
        }
    }

    #[test]
    fn linear_neuron_arithmetic() {
        let net = single(2.0, 1.0, TransferFunction::Linear);
        assert_eq!(net.predict(&[3.0]).unwrap(), vec![7.0]);
    }

    #[test]
    fn two_layer_hand_evaluation() {
        // 2 -> 2 logistic -> 1 logistic, all weights 0.5, biases 0, x = [1, 0].
        // hidden net = 0.5 each, hidden out = 1/(1+e^-0.5) = 0.6224593312018546
        // output net = 0.5 * 2 * 0.6224593312018546 = 0.6224593312018546
        // output = 1/(1+e^-0.6224593312018546) = 0.6507776782147005
        let arch = Architecture::new(2, &[2], 1).unwrap();
        let params = vec![0.5, 0.5, 0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0];
        let net = arch.network(&params).unwrap();
        let trace = net.forward(&[1.0, 0.0]).unwrap();
        assert_eq!(trace.activations.len(), 3);
        assert!((trace.activations[1][0] - 0.6224593312018546).abs() < 1e-15);
        assert!((trace.output()[0] - 0.6507776782147005).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let net = single(1.0, 0.0, TransferFunction::Linear);
        assert!(matches!(net.forward(&[1.0, 2.0]), Err(Error::InputShape(_))));
    }

    #[test]
    fn forward_flags_overflow() {
        let net = single(f64::MAX, 0.0, TransferFunction::Linear);
        assert!(matches!(net.forward(&[10.0]), Err(Error::NumericOverflow(_))));
    }

    #[test]
    fn sample_sse_cases() {
        assert_eq!(sample_sse(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(sample_sse(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        let v = sample_sse(&[1.0, 0.0, 0.0], &[0.8, 0.1, 0.1]).unwrap();
        assert!((v - 0.06).abs() < 1e-15);
        assert!(sample_sse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn total_sse_is_additive() {
        let net = single(2.0, 1.0, TransferFunction::Linear);
        assert_eq!(total_sse(&net, &one_row(3.0, 7.0)).unwrap(), 0.0);
        let two = Dataset::from_rows("t", vec![vec![1.0], vec![1.0]], vec![vec![0.0], vec![0.0]]).unwrap();
        let one = one_row(1.0, 0.0);
        let s = total_sse(&net, &one).unwrap();
        assert_eq!(total_sse(&net, &two).unwrap(), 2.0 * s);
    }

    #[test]
    fn gradient_of_single_linear_neuron() {
        let net = single(0.0, 0.0, TransferFunction::Linear);
        assert_eq!(gradient(&net, &one_row(1.0, 1.0)).unwrap(), vec![-2.0, -2.0]);
    }

    #[test]
    fn gradient_vanishes_at_exact_fit() {
        let net = single(2.0, 1.0, TransferFunction::Linear);
        let data = Dataset::from_rows("t", vec![vec![0.0], vec![3.0]], vec![vec![1.0], vec![7.0]]).unwrap();
        assert_eq!(gradient(&net, &data).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn output_sensitivity_cases() {
        let lin = single(0.0, 0.0, TransferFunction::Linear);
        let trace = lin.forward(&[1.0]).unwrap();
        assert_eq!(output_sensitivity(&lin, &trace, &[0.0]).unwrap(), vec![0.0]);
        assert_eq!(output_sensitivity(&lin, &trace, &[1.0]).unwrap(), vec![-2.0]);

        let log = single(0.0, 0.0, TransferFunction::Logistic);
        let trace = log.forward(&[1.0]).unwrap();
        // a = 0.5, e = 0.9 - 0.5 = 0.4
        let s = output_sensitivity(&log, &trace, &[0.9]).unwrap();
        assert!((s[0] + 0.2).abs() < 1e-15);
        assert!(output_sensitivity(&log, &trace, &[0.9, 0.1]).is_err());
    }

    #[test]
    fn backprop_sensitivity_cases() {
        let arch = Architecture::with_transfers(
            vec![1, 1, 1],
            TransferFunction::Linear,
            TransferFunction::Linear,
        )
        .unwrap();
        let net = arch.network(&[1.0, 0.0, 2.0, 0.0]).unwrap();
        let trace = net.forward(&[1.0]).unwrap();
        let next = &net.layers()[1];
        let s = backprop_sensitivity(next, &[3.0], &trace, TransferFunction::Linear, 0).unwrap();
        assert_eq!(s, vec![6.0]);
        let s = backprop_sensitivity(next, &[0.0], &trace, TransferFunction::Linear, 0).unwrap();
        assert_eq!(s, vec![0.0]);
        assert!(backprop_sensitivity(next, &[1.0, 2.0], &trace, TransferFunction::Linear, 0).is_err());
    }

    #[test]
    fn bp_step_single_neuron() {
        let net = single(0.0, 0.0, TransferFunction::Linear);
        let next = bp_step(&net, &one_row(1.0, 1.0), 0.5).unwrap();
        assert_eq!(next.to_params(), vec![1.0, 1.0]);
        assert_eq!(net.to_params(), vec![0.0, 0.0]);
    }

    #[test]
    fn bp_step_is_identity_without_gradient_or_rate() {
        let net = single(2.0, 1.0, TransferFunction::Linear);
        assert_eq!(bp_step(&net, &one_row(3.0, 7.0), 0.5).unwrap(), net);
        assert_eq!(bp_step(&net, &one_row(3.0, 0.0), 0.0).unwrap(), net);
        assert!(bp_step(&net, &one_row(3.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn architecture_round_trips_params() {
        let arch = Architecture::new(4, &[5], 3).unwrap();
        assert_eq!(arch.param_count(), 4 * 5 + 5 + 5 * 3 + 3);
        let params: Vec<f64> = (0..arch.param_count()).map(|i| i as f64 * 0.01).collect();
        let net = arch.network(&params).unwrap();
        assert_eq!(net.to_params(), params);
        assert_eq!(net.layers()[0].weight(1, 2), params[6]);
        assert_eq!(net.layers()[0].biases()[0], params[20]);
        assert!(arch.network(&params[1..]).is_err());
    }

    #[test]
    fn network_rejects_mismatched_layers() {
        let a = LayerParams::new(2, 3, vec![0.0; 6], vec![0.0; 2], TransferFunction::Linear).unwrap();
        let b = LayerParams::new(1, 3, vec![0.0; 3], vec![0.0], TransferFunction::Linear).unwrap();
        assert!(Network::new(vec![a, b]).is_err());
        assert!(Network::new(vec![]).is_err());
        assert!(LayerParams::new(2, 3, vec![0.0; 5], vec![0.0; 2], TransferFunction::Linear).is_err());
    }
}
