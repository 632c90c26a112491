//! Small fully connected Q-network trained with plain SGD against a frozen target copy.
//!
//! Inputs are binary one-hot encodings (state, plus goal for the controller), so the first
//! layer is evaluated by summing the weight rows of the active inputs.

use super::{max_value, Sample, ValueFunction};
use crate::critic::GoalId;
use crate::env::StateId;
use crate::error::{check_index, Error, Result};
use crate::rng::RngStream;

/// Binary input vector stored as its active indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedInput {
    pub len: usize,
    pub active: Vec<usize>,
}

impl EncodedInput {
    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len];
        for &i in &self.active {
            v[i] = 1.0;
        }
        v
    }
}

/// Fully connected layer. Weights are stored input-major: `w[i * outputs + j]` connects
/// input `i` to output `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            w: vec![0.0; inputs * outputs],
            b: vec![0.0; outputs],
        }
    }

    fn forward_sparse(&self, active: &[usize], out: &mut [f64]) {
        out.copy_from_slice(&self.b);
        for &i in active {
            let row = &self.w[i * self.outputs..(i + 1) * self.outputs];
            out.iter_mut().zip(row).for_each(|(o, w)| *o += w);
        }
    }

    fn forward_dense(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.w[i * self.outputs..(i + 1) * self.outputs];
            out.iter_mut().zip(row).for_each(|(o, w)| *o += xi * w);
        }
    }
}

/// Gradient of the batch loss, laid out like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub layers: Vec<Dense>,
}

impl MlpGradient {
    pub fn flatten(&self) -> Vec<f64> {
        flatten(&self.layers)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpQ {
    states: usize,
    goals: usize,
    learning_rate: f64,
    layers: Vec<Dense>,
    target: Vec<Dense>,
    steps: u64,
}

struct Trace {
    // Post-activation output of every layer (last one is the linear output).
    activations: Vec<Vec<f64>>,
}

impl MlpQ {
    /// `hidden` lists hidden layer widths; weights are drawn uniformly in ±1/√fan_in and
    /// biases start at zero. The target copy starts equal to the live parameters.
    pub fn new(
        states: usize,
        goals: usize,
        hidden: &[usize],
        outputs: usize,
        learning_rate: f64,
        rng: &mut RngStream,
    ) -> Self {
        let mut sizes = vec![states + goals];
        sizes.extend_from_slice(hidden);
        sizes.push(outputs);
        let layers: Vec<Dense> = sizes
            .windows(2)
            .map(|io| {
                let bound = 1.0 / (io[0] as f64).sqrt();
                let mut layer = Dense::zeros(io[0], io[1]);
                layer
                    .w
                    .iter_mut()
                    .for_each(|w| *w = (2.0 * rng.uniform() - 1.0) * bound);
                layer
            })
            .collect();
        Self {
            states,
            goals,
            learning_rate,
            target: layers.clone(),
            layers,
            steps: 0,
        }
    }

    /// Network with every weight and bias zero.
    pub fn zeros(states: usize, goals: usize, hidden: &[usize], outputs: usize, learning_rate: f64) -> Self {
        let mut sizes = vec![states + goals];
        sizes.extend_from_slice(hidden);
        sizes.push(outputs);
        let layers: Vec<Dense> = sizes.windows(2).map(|io| Dense::zeros(io[0], io[1])).collect();
        Self {
            states,
            goals,
            learning_rate,
            target: layers.clone(),
            layers,
            steps: 0,
        }
    }

    pub(crate) fn from_layers(states: usize, goals: usize, learning_rate: f64, layers: Vec<Dense>) -> Self {
        Self {
            states,
            goals,
            learning_rate,
            target: layers.clone(),
            layers,
            steps: 0,
        }
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn target_layers(&self) -> &[Dense] {
        &self.target
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn training_steps(&self) -> u64 {
        self.steps
    }

    /// Hidden layer widths.
    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.outputs)
            .collect()
    }

    pub fn encode(&self, state: StateId, goal: Option<GoalId>) -> Result<EncodedInput> {
        check_index("state", state.0, self.states)?;
        let mut active = vec![state.0];
        match (goal, self.goals) {
            (None, 0) => {}
            (Some(g), n) if n > 0 => {
                check_index("goal", g.0, n)?;
                active.push(self.states + g.0);
            }
            (Some(g), _) => return Err(Error::UnknownGoal(g.0)),
            (None, n) => {
                return Err(Error::OutOfRange {
                    what: "goal (missing)",
                    index: 0,
                    size: n,
                })
            }
        }
        Ok(EncodedInput {
            len: self.states + self.goals,
            active,
        })
    }

    fn run(layers: &[Dense], input: &EncodedInput) -> Trace {
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(layers.len());
        for (k, layer) in layers.iter().enumerate() {
            let mut out = vec![0.0; layer.outputs];
            if k == 0 {
                layer.forward_sparse(&input.active, &mut out);
            } else {
                layer.forward_dense(&activations[k - 1], &mut out);
            }
            if k + 1 < layers.len() {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(out);
        }
        Trace { activations }
    }

    pub fn forward(&self, input: &EncodedInput) -> Vec<f64> {
        Self::run(&self.layers, input).activations.pop().unwrap_or_default()
    }

    pub fn forward_target(&self, input: &EncodedInput) -> Vec<f64> {
        Self::run(&self.target, input).activations.pop().unwrap_or_default()
    }

    /// Regression targets `y = r + γ·max Q_target(s′)·(1 − terminal)`.
    pub fn targets(&self, batch: &[Sample], gamma: f64) -> Result<Vec<f64>> {
        batch
            .iter()
            .map(|s| {
                if s.terminal {
                    Ok(s.reward)
                } else {
                    let next = self.encode(s.next_state, s.goal)?;
                    Ok(s.reward + gamma * max_value(&self.forward_target(&next)))
                }
            })
            .collect()
    }

    /// Mean over the batch of `(y − Q(x, choice))²` with fixed targets.
    pub fn loss(&self, inputs: &[(EncodedInput, usize, f64)]) -> f64 {
        let n = inputs.len() as f64;
        inputs
            .iter()
            .map(|(x, c, y)| {
                let q = self.forward(x)[*c];
                (y - q) * (y - q)
            })
            .sum::<f64>()
            / n
    }

    /// Analytic gradient of [`MlpQ::loss`] and the loss itself.
    pub fn gradient(&self, inputs: &[(EncodedInput, usize, f64)]) -> (f64, MlpGradient) {
        let mut grad: Vec<Dense> = self
            .layers
            .iter()
            .map(|l| Dense::zeros(l.inputs, l.outputs))
            .collect();
        let n = inputs.len() as f64;
        let mut loss = 0.0;
        for (x, choice, y) in inputs {
            let trace = Self::run(&self.layers, x);
            let last = self.layers.len() - 1;
            let q = trace.activations[last][*choice];
            loss += (y - q) * (y - q);
            // dL/dQ for this sample; every other output has zero gradient.
            let mut delta = vec![0.0; self.layers[last].outputs];
            delta[*choice] = 2.0 * (q - y) / n;
            for k in (0..self.layers.len()).rev() {
                let layer = &self.layers[k];
                let g = &mut grad[k];
                g.b.iter_mut().zip(&delta).for_each(|(gb, d)| *gb += d);
                if k == 0 {
                    for &i in &x.active {
                        let row = &mut g.w[i * layer.outputs..(i + 1) * layer.outputs];
                        row.iter_mut().zip(&delta).for_each(|(gw, d)| *gw += d);
                    }
                    break;
                }
                let prev = &trace.activations[k - 1];
                let mut back = vec![0.0; layer.inputs];
                for (i, &a) in prev.iter().enumerate() {
                    let row = &layer.w[i * layer.outputs..(i + 1) * layer.outputs];
                    let grow = &mut g.w[i * layer.outputs..(i + 1) * layer.outputs];
                    let mut acc = 0.0;
                    for j in 0..layer.outputs {
                        grow[j] += a * delta[j];
                        acc += row[j] * delta[j];
                    }
                    // ReLU derivative, taken as zero at the kink.
                    back[i] = if a > 0.0 { acc } else { 0.0 };
                }
                delta = back;
            }
        }
        (loss / n, MlpGradient { layers: grad })
    }

    fn apply(&mut self, grad: &MlpGradient) {
        let lr = self.learning_rate;
        for (layer, g) in self.layers.iter_mut().zip(&grad.layers) {
            layer.w.iter_mut().zip(&g.w).for_each(|(w, d)| *w -= lr * d);
            layer.b.iter_mut().zip(&g.b).for_each(|(b, d)| *b -= lr * d);
        }
    }

    /// All live parameters, layer by layer: weights then biases.
    pub fn parameters(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        let mut it = params.iter().copied();
        for layer in &mut self.layers {
            layer.w.iter_mut().for_each(|w| *w = it.next().expect("parameter count"));
            layer.b.iter_mut().for_each(|b| *b = it.next().expect("parameter count"));
        }
        assert!(it.next().is_none(), "parameter count");
    }
}

fn flatten(layers: &[Dense]) -> Vec<f64> {
    layers
        .iter()
        .flat_map(|l| l.w.iter().chain(l.b.iter()).copied())
        .collect()
}

impl ValueFunction for MlpQ {
    fn state_count(&self) -> usize {
        self.states
    }

    fn goal_count(&self) -> usize {
        self.goals
    }

    fn output_count(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    fn evaluate(&self, state: StateId, goal: Option<GoalId>) -> Result<Vec<f64>> {
        Ok(self.forward(&self.encode(state, goal)?))
    }

    /// One SGD step on the mean squared error against frozen-target regression targets.
    fn train(&mut self, batch: &[Sample], gamma: f64) -> Result<f64> {
        if batch.is_empty() {
            return Ok(0.0);
        }
        let targets = self.targets(batch, gamma)?;
        let outputs = self.output_count();
        let inputs = batch
            .iter()
            .zip(targets)
            .map(|(s, y)| {
                check_index("choice", s.choice, outputs)?;
                Ok((self.encode(s.state, s.goal)?, s.choice, y))
            })
            .collect::<Result<Vec<_>>>()?;
        let (loss, grad) = self.gradient(&inputs);
        self.steps += 1;
        if !loss.is_finite() {
            return Err(Error::Divergence {
                loss,
                step: self.steps,
            });
        }
        self.apply(&grad);
        Ok(loss)
    }

    fn sync_target(&mut self) {
        self.target.clone_from(&self.layers);
    }
}
