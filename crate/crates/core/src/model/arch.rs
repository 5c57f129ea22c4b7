//! Layer graphs for the two network variants.
//!
//! Both share the same residual block (conv-relu-conv, shortcut add, relu,
//! 2/2 max pool) and the same classifier head (flatten, dense 32, relu,
//! dense n_classes). The original stacks an initial 16-filter conv and five
//! blocks with filters 16..256; the modified variant keeps three blocks with
//! filters 16, 32, 64.

use crate::error::{EcgError, Result};
use serde::{Deserialize, Serialize};

pub const KERNEL_SIZE: usize = 3;
pub const HIDDEN_UNITS: usize = 32;
pub const DEFAULT_INPUT_LENGTH: usize = 187;

pub const ORIGINAL_BLOCK_FILTERS: [usize; 5] = [16, 32, 64, 128, 256];
pub const MODIFIED_BLOCK_FILTERS: [usize; 3] = [16, 32, 64];
pub const ORIGINAL_STEM_FILTERS: usize = 16;

pub const ORIGINAL_MIN_INPUT: usize = 64;
pub const MODIFIED_MIN_INPUT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    Original,
    Modified,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::Original => "original",
            Arch::Modified => "modified",
        }
    }
}

impl std::str::FromStr for Arch {
    type Err = EcgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Arch::Original),
            "modified" => Ok(Arch::Modified),
            other => Err(EcgError::InvalidArgument(format!(
                "unknown architecture {other:?} (expected original|modified)"
            ))),
        }
    }
}

impl std::fmt::Display for Arch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv { filters: usize, kernel: usize },
    Relu,
    Maxpool { window: usize, stride: usize },
    /// Two `kernel`-wide convs with `filters` channels, identity or 1x1
    /// projection shortcut, post-add relu, then a 2/2 max pool.
    ResidualBlock { filters: usize, kernel: usize },
    Flatten,
    Dense { units: usize },
}

impl LayerSpec {
    /// Convolutions that count toward the architecture's conv depth.
    /// Projection shortcuts are not counted.
    pub fn counted_convs(&self) -> usize {
        match self {
            LayerSpec::Conv { .. } => 1,
            LayerSpec::ResidualBlock { .. } => 2,
            _ => 0,
        }
    }
}

/// Activation shape between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Signal { channels: usize, length: usize },
    Vector(usize),
}

impl Shape {
    pub fn size(&self) -> usize {
        match *self {
            Shape::Signal { channels, length } => channels * length,
            Shape::Vector(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: Arch,
    pub input_length: usize,
    pub n_classes: usize,
    pub layers: Vec<LayerSpec>,
    pub label_names: Vec<String>,
}

fn head(n_classes: usize) -> [LayerSpec; 4] {
    [
        LayerSpec::Flatten,
        LayerSpec::Dense { units: HIDDEN_UNITS },
        LayerSpec::Relu,
        LayerSpec::Dense { units: n_classes },
    ]
}

fn blocks(filters: &[usize]) -> impl Iterator<Item = LayerSpec> + '_ {
    filters.iter().map(|&filters| LayerSpec::ResidualBlock {
        filters,
        kernel: KERNEL_SIZE,
    })
}

impl ModelSpec {
    pub fn for_arch(arch: Arch, input_length: usize, label_names: Vec<String>) -> Result<Self> {
        match arch {
            Arch::Original => Self::original(input_length, label_names),
            Arch::Modified => Self::modified(input_length, label_names),
        }
    }

    pub fn original(input_length: usize, label_names: Vec<String>) -> Result<Self> {
        if input_length < ORIGINAL_MIN_INPUT {
            return Err(EcgError::Shape(format!(
                "original architecture needs input length >= {ORIGINAL_MIN_INPUT}, got {input_length}"
            )));
        }
        let mut layers = vec![
            LayerSpec::Conv {
                filters: ORIGINAL_STEM_FILTERS,
                kernel: KERNEL_SIZE,
            },
            LayerSpec::Relu,
        ];
        layers.extend(blocks(&ORIGINAL_BLOCK_FILTERS));
        layers.extend(head(label_names.len()));
        Self::new(Arch::Original, input_length, layers, label_names)
    }

    pub fn modified(input_length: usize, label_names: Vec<String>) -> Result<Self> {
        if input_length < MODIFIED_MIN_INPUT {
            return Err(EcgError::Shape(format!(
                "modified architecture needs input length >= {MODIFIED_MIN_INPUT}, got {input_length}"
            )));
        }
        let mut layers: Vec<LayerSpec> = blocks(&MODIFIED_BLOCK_FILTERS).collect();
        layers.extend(head(label_names.len()));
        Self::new(Arch::Modified, input_length, layers, label_names)
    }

    fn new(
        name: Arch,
        input_length: usize,
        layers: Vec<LayerSpec>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let spec = Self {
            name,
            input_length,
            n_classes: label_names.len(),
            layers,
            label_names,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes == 0 || self.n_classes != self.label_names.len() {
            return Err(EcgError::Shape(format!(
                "n_classes {} does not match {} label names",
                self.n_classes,
                self.label_names.len()
            )));
        }
        let expected = match self.name {
            Arch::Original => 11,
            Arch::Modified => 6,
        };
        if self.counted_convs() != expected {
            return Err(EcgError::Shape(format!(
                "{} architecture must have {expected} convs, found {}",
                self.name,
                self.counted_convs()
            )));
        }
        match self.shapes()?.last() {
            Some(Shape::Vector(n)) if *n == self.n_classes => Ok(()),
            other => Err(EcgError::Shape(format!(
                "network output {other:?} does not match {} classes",
                self.n_classes
            ))),
        }
    }

    pub fn counted_convs(&self) -> usize {
        self.layers.iter().map(LayerSpec::counted_convs).sum()
    }

    pub fn block_filters(&self) -> Vec<usize> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::ResidualBlock { filters, .. } => Some(*filters),
                _ => None,
            })
            .collect()
    }

    /// Output shape of every layer, validating compatibility along the way.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        let mut cur = Shape::Signal {
            channels: 1,
            length: self.input_length,
        };
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            cur = match (*layer, cur) {
                (LayerSpec::Conv { filters, kernel }, Shape::Signal { length, .. }) => {
                    check_kernel(i, kernel)?;
                    Shape::Signal {
                        channels: filters,
                        length,
                    }
                }
                (LayerSpec::ResidualBlock { filters, kernel }, Shape::Signal { length, .. }) => {
                    check_kernel(i, kernel)?;
                    if length < 2 {
                        return Err(EcgError::Shape(format!(
                            "layer {i}: residual block needs length >= 2, got {length}"
                        )));
                    }
                    Shape::Signal {
                        channels: filters,
                        length: length / 2,
                    }
                }
                (LayerSpec::Maxpool { window, stride }, Shape::Signal { channels, length }) => {
                    if window == 0 || stride == 0 || length < window {
                        return Err(EcgError::Shape(format!(
                            "layer {i}: pool {window}/{stride} invalid for length {length}"
                        )));
                    }
                    Shape::Signal {
                        channels,
                        length: (length - window) / stride + 1,
                    }
                }
                (LayerSpec::Relu, s) => s,
                (LayerSpec::Flatten, s) => Shape::Vector(s.size()),
                (LayerSpec::Dense { units }, Shape::Vector(_)) if units > 0 => Shape::Vector(units),
                (l, s) => {
                    return Err(EcgError::Shape(format!(
                        "layer {i}: {l:?} cannot follow shape {s:?}"
                    )))
                }
            };
            out.push(cur);
        }
        Ok(out)
    }

    /// Length of the flattened feature vector feeding the head.
    pub fn flatten_size(&self) -> Result<usize> {
        let shapes = self.shapes()?;
        self.layers
            .iter()
            .position(|l| *l == LayerSpec::Flatten)
            .map(|i| shapes[i].size())
            .ok_or_else(|| EcgError::Shape("model has no flatten layer".into()))
    }
}

fn check_kernel(layer: usize, kernel: usize) -> Result<()> {
    if kernel % 2 == 1 {
        Ok(())
    } else {
        Err(EcgError::Shape(format!(
            "layer {layer}: kernel size must be odd, got {kernel}"
        )))
    }
}
