//! Synthetic single-beat corpora shaped like the public preprocessed
//! MIT-BIH and PTB releases: each row starts at an R peak, is min-max
//! normalized to `[0, 1]` over the beat, and is zero-padded to the fixed
//! length. Class morphologies are stylized (premature beats, wide
//! ventricular complexes, paced spikes, ST elevation and T inversion) with
//! amplitude, timing and noise jitter so the classes overlap.
//!
//! These corpora stand in for the real databases in tests and demos. They
//! are not a substitute for them when judging clinical accuracy.

use super::split::largest_remainder;
use super::{BeatRecord, Dataset, LabelMap};
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Per-class beat totals of the full MIT-BIH single-beat release
/// (N, S, V, F, Q).
pub const MIT_BIH_CLASS_TOTALS: [usize; 5] = [90_589, 2_779, 7_236, 803, 8_039];
/// Per-class beat totals of the PTB single-beat release (normal, abnormal).
pub const PTB_CLASS_TOTALS: [usize; 2] = [4_046, 10_506];

#[derive(Debug, Clone, Copy)]
struct Wave {
    center: f32,
    amp: f32,
    width: f32,
}

impl Wave {
    fn new(center: f32, amp: f32, width: f32) -> Self {
        Self { center, amp, width }
    }

    fn at(&self, t: f32) -> f32 {
        let z = (t - self.center) / self.width;
        self.amp * (-0.5 * z * z).exp()
    }
}

fn jitter(rng: &mut rng::Rng, x: f32, rel: f32) -> f32 {
    x * (1.0 + rng.gen_range(-rel..=rel))
}

/// Waves for the beat starting at t = 0 (R peak) and the onset of the next
/// beat at `rr`.
fn normal_waves(rng: &mut rng::Rng, rr: f32) -> Vec<Wave> {
    vec![
        Wave::new(0.0, 1.0, jitter(rng, 2.2, 0.2)),
        Wave::new(jitter(rng, 6.0, 0.2), jitter(rng, -0.22, 0.3), 2.0),
        Wave::new(jitter(rng, 42.0, 0.15), jitter(rng, 0.3, 0.35), jitter(rng, 9.0, 0.2)),
        Wave::new(rr - jitter(rng, 24.0, 0.15), jitter(rng, 0.12, 0.35), 4.5),
        Wave::new(rr - 5.0, jitter(rng, -0.1, 0.3), 1.8),
        Wave::new(rr, 1.0, 2.2),
    ]
}

fn mit_bih_waves(class: usize, rng: &mut rng::Rng) -> (Vec<Wave>, f32) {
    match class {
        // normal
        0 => {
            let rr = rng.gen_range(105.0..170.0);
            (normal_waves(rng, rr), rr)
        }
        // supraventricular: premature next beat, abnormal P wave
        1 => {
            let rr = rng.gen_range(80.0..140.0);
            let mut w = normal_waves(rng, rr);
            w[3] = Wave::new(rr - jitter(rng, 18.0, 0.3), rng.gen_range(-0.1..0.12), 4.0);
            (w, rr)
        }
        // ventricular: wide complex, discordant T, no P
        2 => {
            let rr = rng.gen_range(110.0..180.0);
            let w = vec![
                Wave::new(0.0, 1.0, jitter(rng, 6.5, 0.25)),
                Wave::new(jitter(rng, 13.0, 0.2), jitter(rng, -0.55, 0.3), jitter(rng, 6.0, 0.25)),
                Wave::new(jitter(rng, 50.0, 0.15), jitter(rng, -0.35, 0.4), jitter(rng, 13.0, 0.2)),
                Wave::new(rr, 1.0, 2.2),
            ];
            (w, rr)
        }
        // fusion: partial blend of a normal and a ventricular complex
        3 => {
            let (normal, rr) = mit_bih_waves(0, rng);
            let (vent, _) = mit_bih_waves(2, rng);
            let a = rng.gen_range(0.15..0.6f32);
            let mut w: Vec<Wave> = normal
                .into_iter()
                .map(|x| Wave::new(x.center, x.amp * (1.0 - a), x.width))
                .collect();
            w.extend(vent.into_iter().take(3).map(|x| Wave::new(x.center, x.amp * a, x.width)));
            w.push(Wave::new(0.0, a * 0.4, 3.0));
            (w, rr)
        }
        // unknown / paced: pacing spike, then a broad complex
        _ => {
            let rr = rng.gen_range(120.0..160.0);
            let w = vec![
                Wave::new(0.0, 1.0, 0.7),
                Wave::new(jitter(rng, 7.0, 0.2), jitter(rng, 0.55, 0.3), jitter(rng, 5.5, 0.2)),
                Wave::new(jitter(rng, 16.0, 0.2), jitter(rng, -0.3, 0.3), 5.0),
                Wave::new(jitter(rng, 55.0, 0.15), jitter(rng, 0.25, 0.4), 14.0),
                Wave::new(rr, 1.0, 0.7),
            ];
            (w, rr)
        }
    }
}

fn ptb_waves(class: usize, rng: &mut rng::Rng) -> (Vec<Wave>, f32) {
    let rr = rng.gen_range(110.0..175.0);
    let mut w = normal_waves(rng, rr);
    if class == 1 {
        match rng.gen_range(0..3) {
            // ST elevation
            0 => w.push(Wave::new(jitter(rng, 22.0, 0.2), jitter(rng, 0.28, 0.35), 11.0)),
            // T inversion
            1 => w[2].amp = -w[2].amp.abs() * jitter(rng, 1.1, 0.3),
            // pathological Q wave with flattened T
            _ => {
                w[4] = Wave::new(rr - 6.0, jitter(rng, -0.4, 0.3), 3.0);
                w[2].amp *= 0.3;
            }
        }
    }
    (w, rr)
}

fn render(waves: &[Wave], rr: f32, length: usize, rng: &mut rng::Rng) -> Vec<f32> {
    let noise = Normal::new(0.0f32, 0.03).expect("valid sigma");
    // the beat extends a little past the next R onset, then zero padding
    let beat_len = ((rr + 12.0) as usize).clamp(8, length);
    let wander_amp = rng.gen_range(0.0..0.06f32);
    let wander_phase = rng.gen_range(0.0..std::f32::consts::TAU);
    let mut raw: Vec<f32> = (0..beat_len)
        .map(|i| {
            let t = i as f32;
            let clean: f32 = waves.iter().map(|w| w.at(t)).sum();
            clean + wander_amp * (t / 60.0 + wander_phase).sin() + noise.sample(rng)
        })
        .collect();
    let lo = raw.iter().copied().fold(f32::INFINITY, f32::min);
    let hi = raw.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let span = (hi - lo).max(1e-6);
    raw.iter_mut().for_each(|v| *v = ((*v - lo) / span).clamp(0.0, 1.0));
    raw.resize(length, 0.0);
    raw
}

fn generate(
    n: usize,
    length: usize,
    seed: u64,
    totals: &[usize],
    labels: LabelMap,
    waves: fn(usize, &mut rng::Rng) -> (Vec<Wave>, f32),
) -> Dataset {
    let sum: usize = totals.iter().sum();
    let ratios: Vec<f64> = totals.iter().map(|&t| t as f64 / sum as f64).collect();
    let counts = largest_remainder(n, &ratios);
    let mut order: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(label, &c)| std::iter::repeat_n(label, c))
        .collect();
    let mut rng = rng::seeded(seed);
    order.shuffle(&mut rng);
    let records = order
        .into_iter()
        .map(|label| {
            let (w, rr) = waves(label, &mut rng);
            BeatRecord {
                samples: render(&w, rr, length, &mut rng),
                label,
            }
        })
        .collect();
    Dataset::new(records, labels).expect("generated records are valid")
}

/// `n` five-class beats with MIT-BIH class proportions.
pub fn mit_bih_like(n: usize, length: usize, seed: u64) -> Dataset {
    generate(n, length, seed, &MIT_BIH_CLASS_TOTALS, LabelMap::mit_bih(), mit_bih_waves)
}

/// `n` normal/abnormal beats with PTB class proportions.
pub fn ptb_like(n: usize, length: usize, seed: u64) -> Dataset {
    generate(n, length, seed, &PTB_CLASS_TOTALS, LabelMap::ptb(), ptb_waves)
}
