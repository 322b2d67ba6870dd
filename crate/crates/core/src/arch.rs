//! Decoding genomes into an explicit layer-by-layer network description.
//!
//! Every skip block is `conv3x3 -> batch-norm -> relu -> conv3x3 -> batch-norm
//! -> relu`, summed with its input. When the block input has a different
//! channel count from the second convolution, the shortcut goes through a
//! biased 1x1 convolution (the adapter) with no batch-norm. Pool blocks are
//! 2x2 with stride 2. The classifier head is global-average-pool, one linear
//! layer to the class count, and softmax.
//!
//! JSON layout (consumed by external trainers):
//!
//! ```json
//! {
//!   "input_shape": {"height": 32, "width": 32, "channels": 3},
//!   "blocks": [
//!     {"type": "skip", "in_channels": 3, "conv1_out": 64, "conv2_out": 128,
//!      "adapter_out": 128, "spatial": 32, "kernel": [3, 3], "stride": [1, 1],
//!      "padding": "same", "order": ["conv", "batch_norm", "relu"]},
//!     {"type": "pool", "pool_type": "max", "in_channels": 128,
//!      "spatial_in": 32, "spatial_out": 16, "kernel": [2, 2], "stride": [2, 2]}
//!   ],
//!   "head": {"type": "gap_linear_softmax", "in_features": 128, "num_classes": 10},
//!   "num_classes": 10
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{Genome, LayerGene, PoolType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputShape {
    pub height: u32,
    pub width: u32,
    pub channels: u32,
}

impl InputShape {
    pub fn new(height: u32, width: u32, channels: u32) -> Self {
        InputShape { height, width, channels }
    }

    /// Square images with `channels` planes.
    pub fn square(side: u32, channels: u32) -> Self {
        Self::new(side, side, channels)
    }

    /// Smaller of height and width; bounds the number of pools.
    pub fn min_side(&self) -> u32 {
        self.height.min(self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Block {
    Skip(SkipBlock),
    Pool(PoolBlock),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipBlock {
    pub in_channels: u32,
    pub conv1_out: u32,
    pub conv2_out: u32,
    /// Output channels of the 1x1 shortcut convolution, if one is needed.
    pub adapter_out: Option<u32>,
    pub spatial: [u32; 2],
    pub kernel: [u32; 2],
    pub stride: [u32; 2],
    pub padding: String,
    pub order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolBlock {
    pub pool_type: PoolType,
    pub in_channels: u32,
    pub spatial_in: [u32; 2],
    pub spatial_out: [u32; 2],
    pub kernel: [u32; 2],
    pub stride: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Head {
    #[serde(rename = "type")]
    pub kind: String,
    pub in_features: u32,
    pub num_classes: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureIR {
    pub input_shape: InputShape,
    pub blocks: Vec<Block>,
    pub head: Head,
    pub num_classes: u32,
}

impl ArchitectureIR {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("IR serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("IR serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Channel count fed to the classifier head.
    pub fn output_channels(&self) -> u32 {
        self.head.in_features
    }

    /// Spatial size fed to the classifier head, as (height, width).
    pub fn output_spatial(&self) -> [u32; 2] {
        let mut spatial = [self.input_shape.height, self.input_shape.width];
        for block in &self.blocks {
            if let Block::Pool(p) = block {
                spatial = p.spatial_out;
            }
        }
        spatial
    }
}

pub fn decode(genome: &Genome, input_shape: InputShape, num_classes: u32) -> Result<ArchitectureIR> {
    if num_classes < 2 {
        return Err(Error::config("num_classes", format!("must be at least 2, got {num_classes}")));
    }
    if input_shape.height == 0 || input_shape.width == 0 || input_shape.channels == 0 {
        return Err(Error::config("input_shape", "all dimensions must be positive"));
    }
    let report = genome.validate(input_shape.min_side());
    if !report.valid {
        return Err(Error::InvalidGenome(report));
    }

    let mut channels = input_shape.channels;
    let mut spatial = [input_shape.height, input_shape.width];
    let mut blocks = Vec::with_capacity(genome.len());
    for gene in genome.layers() {
        match *gene {
            LayerGene::Skip(s) => {
                blocks.push(Block::Skip(SkipBlock {
                    in_channels: channels,
                    conv1_out: s.f1,
                    conv2_out: s.f2,
                    adapter_out: (channels != s.f2).then_some(s.f2),
                    spatial,
                    kernel: [3, 3],
                    stride: [1, 1],
                    padding: "same".to_string(),
                    order: vec!["conv".into(), "batch_norm".into(), "relu".into()],
                }));
                channels = s.f2;
            }
            LayerGene::Pool(p) => {
                let out = [spatial[0] / 2, spatial[1] / 2];
                blocks.push(Block::Pool(PoolBlock {
                    pool_type: p.pool_type,
                    in_channels: channels,
                    spatial_in: spatial,
                    spatial_out: out,
                    kernel: [2, 2],
                    stride: [2, 2],
                }));
                spatial = out;
            }
        }
    }

    Ok(ArchitectureIR {
        input_shape,
        blocks,
        head: Head { kind: "gap_linear_softmax".to_string(), in_features: channels, num_classes },
        num_classes,
    })
}

/// Learnable parameter total: conv weights and biases, batch-norm scale and
/// shift, adapter weights and bias, and the linear head. Batch-norm running
/// statistics are not counted.
pub fn count_parameters(arch: &ArchitectureIR) -> u64 {
    let conv3 = |cin: u64, cout: u64| 9 * cin * cout + cout;
    let bn = |c: u64| 2 * c;
    let mut total = 0u64;
    for block in &arch.blocks {
        if let Block::Skip(s) = block {
            let (cin, f1, f2) = (s.in_channels as u64, s.conv1_out as u64, s.conv2_out as u64);
            total += conv3(cin, f1) + bn(f1) + conv3(f1, f2) + bn(f2);
            if let Some(out) = s.adapter_out {
                total += cin * out as u64 + out as u64;
            }
        }
    }
    let (c, k) = (arch.head.in_features as u64, arch.head.num_classes as u64);
    total + c * k + k
}
