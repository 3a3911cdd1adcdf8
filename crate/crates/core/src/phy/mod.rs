//! SC-FDE transceiver: coding, mapping, framing, synchronization,
//! equalization and link metrics.

pub mod fde;
pub mod frame;
pub mod ldpc;
pub mod metrics;
pub mod qpsk;
pub mod sync;

pub use fde::{fde_equalize, NoiseVariance};
pub use frame::{
    build_frame, build_frame_chains, receive, FrameConfig, FrameLayout, ReceiverConfig, TxFrame, UserReception,
};
pub use ldpc::{ldpc_decode, ldpc_encode};
pub use metrics::{compute_metrics, Metrics, MetricsAccumulator};
pub use qpsk::{demap_qpsk, map_qpsk};
pub use sync::{synchronize, SyncConfig};
