//! Shared fixtures for the criterion benches.

use ecgnet::data::synth;
use ecgnet::{ParamTensor, Signal};

pub const BEAT_LENGTH: usize = 187;

/// Deterministic synthetic beats at the standard length.
pub fn beats(n: usize) -> Vec<Signal> {
    synth::mit_bih_like(n, BEAT_LENGTH, 7).signals()
}

/// Input, weights and bias for one conv layer, filled with a fixed pattern.
pub fn conv_case(in_ch: usize, out_ch: usize, k: usize, len: usize) -> (Signal, ParamTensor, ParamTensor) {
    let wave = |i: usize| ((i * 37 % 101) as f32 / 101.0) - 0.5;
    let x = Signal::new(in_ch, len, (0..in_ch * len).map(wave).collect()).expect("sizes agree");
    let w = ParamTensor::new(vec![out_ch, in_ch, k], (0..out_ch * in_ch * k).map(wave).collect()).expect("sizes agree");
    let b = ParamTensor::zeros(vec![out_ch]);
    (x, w, b)
}
