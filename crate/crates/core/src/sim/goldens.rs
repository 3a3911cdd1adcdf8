//! Regression fixtures: the first frame of a scenario captured at the
//! transmitter, at each combiner output and after decoding.
//!
//! Sample files hold little-endian `f32` pairs `(I, Q)`; LLR files hold
//! little-endian `f32`; bit files hold one byte (0 or 1) per bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::channel::transmit_combined;
use crate::error::{Error, Result};
use crate::phy::frame::{build_frame_chains, build_sounding, receive, FrameConfig};
use crate::phy::ldpc::INFO_BITS;
use crate::sim::runner::{
    design_precoder, payload_bits, receiver_config, sound, sub_seed, with_silence, Link, TAG_CHANNEL, TAG_DATA_NOISE,
    TAG_SOUNDING_NOISE,
};
use crate::sim::scenario::{CsiSource, PrecoderMode, Scenario};

/// One frame of one precoder mode, end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCapture {
    pub mode: PrecoderMode,
    /// RF-chain baseband streams including the leading and trailing silence.
    pub tx_chains: Vec<Vec<Complex64>>,
    /// Combiner output of every user.
    pub rx: Vec<Vec<Complex64>>,
    pub llrs: Vec<Vec<f64>>,
    pub decoded: Vec<Vec<u8>>,
    /// Transmitted payload bits, for convenience.
    pub sent: Vec<Vec<u8>>,
}

/// Frame 0 of `scenario` in `mode`, following the runner's seeding exactly.
pub fn capture_frame(scenario: &Scenario, mode: PrecoderMode) -> Result<FrameCapture> {
    scenario.validate()?;
    let frame_seed = scenario.seed;
    // Static and per-frame channels coincide at frame 0.
    let link = Link::build(scenario, sub_seed(frame_seed, TAG_CHANNEL))?;
    let rx_cfg = receiver_config(scenario);
    let n_info = scenario.codewords_per_frame * INFO_BITS;
    let sent: Vec<Vec<u8>> = (0..scenario.n_users())
        .map(|u| payload_bits(frame_seed, u, n_info))
        .collect();

    let h_est = match scenario.csi {
        CsiSource::Oracle => link.oracle.clone(),
        CsiSource::Estimated => {
            let sounding = build_sounding(scenario.bs.subarrays, scenario.bs.subarray.len())?;
            sound(
                scenario,
                &link,
                &sounding,
                scenario.noise.power,
                sub_seed(frame_seed, TAG_SOUNDING_NOISE),
                &rx_cfg,
            )?
            .ok_or_else(|| Error::Framing("sounding burst not acquired".into()))?
        }
    };
    let f_d = design_precoder(mode, &h_est, &link.analog, scenario.rzf_gamma())?;
    let frame_cfg = FrameConfig {
        codewords_per_user: scenario.codewords_per_frame,
        pcef_repetitions: scenario.receiver.pcef_repetitions,
    };
    let tx = build_frame_chains(&sent, &f_d, link.analog.f_a.m_sub(), frame_cfg)?;
    let tx_chains = with_silence(&tx.chains, scenario.receiver.lead_samples);
    let rx = transmit_combined(
        &tx_chains,
        &link.taps,
        &link.noise_vars(scenario.noise.power),
        sub_seed(frame_seed, TAG_DATA_NOISE),
    )?;
    let mut llrs = Vec::with_capacity(rx.len());
    let mut decoded = Vec::with_capacity(rx.len());
    for (u, r) in rx.iter().enumerate() {
        let rec = receive(r, &tx.layout, u, &rx_cfg)?;
        decoded.push(rec.info_bits());
        llrs.push(rec.llrs);
    }
    Ok(FrameCapture {
        mode,
        tx_chains,
        rx,
        llrs,
        decoded,
        sent,
    })
}

pub fn encode_iq(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for z in samples {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out
}

pub fn decode_iq(bytes: &[u8]) -> Result<Vec<Complex64>> {
    let v = decode_f32(bytes)?;
    if v.len() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "{} floats is not a whole number of I/Q pairs",
            v.len()
        )));
    }
    Ok(v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

pub fn encode_f32(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|&x| (x as f32).to_le_bytes()).collect()
}

pub fn decode_f32(bytes: &[u8]) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Dimension(format!(
            "{} bytes is not a whole number of f32 values",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

/// File name and contents of every fixture in `capture`.
pub fn fixture_files(capture: &FrameCapture) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for (j, c) in capture.tx_chains.iter().enumerate() {
        files.push((format!("tx_chain{j}.iq"), encode_iq(c)));
    }
    for (u, r) in capture.rx.iter().enumerate() {
        files.push((format!("rx_user{u}.iq"), encode_iq(r)));
        files.push((format!("llr_user{u}.f32"), encode_f32(&capture.llrs[u])));
        files.push((format!("bits_user{u}.u8"), capture.decoded[u].clone()));
    }
    files
}

/// Writes the fixtures plus a `MANIFEST` listing element counts.
pub fn write_goldens(capture: &FrameCapture, scenario: &Scenario, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::new();
    let _ = writeln!(manifest, "seed {}", scenario.seed);
    let _ = writeln!(manifest, "mode {}", capture.mode);
    let _ = writeln!(manifest, "noise_power {}", scenario.noise.power);
    let mut paths = Vec::new();
    for (name, bytes) in fixture_files(capture) {
        let width = if name.ends_with(".iq") {
            8
        } else if name.ends_with(".f32") {
            4
        } else {
            1
        };
        let _ = writeln!(manifest, "{name} {}", bytes.len() / width);
        let path = dir.join(&name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    let path = dir.join("MANIFEST");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    paths.push(path);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iq_round_trip() {
        let z = vec![Complex64::new(0.5, -1.25), Complex64::new(3.0, 0.0)];
        let bytes = encode_iq(&z);
        assert_eq!(bytes.len(), 16);
        assert_eq!(&bytes[..4], &0.5f32.to_le_bytes());
        assert_eq!(decode_iq(&bytes).unwrap(), z);
        assert!(decode_iq(&bytes[..12]).is_err());
        assert!(decode_f32(&bytes[..3]).is_err());
    }
}
