//! Frame assembly and the per-user receiver.
//!
//! Layout (RF-chain level, all fields sample aligned):
//!
//! ```text
//! | STF | CEF (M_RF slots) | precoded CEF (K streams x R reps x [A, B]) | header | data blocks |
//! ```
//!
//! The STF and CEF bypass the digital precoder. Every precoded-CEF block is
//! a cyclic-prefixed length-512 Golay sequence carried by one stream only, so
//! each user can measure both its own precoded channel and the leakage of
//! every other stream. Header and data are 640-sample SC blocks.

use crc::{Crc, CRC_16_IBM_3740};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::HybridAnalogMatrix;
use crate::block::{add_cp, strip_cp, BlockTransform, BLOCK_LEN, FFT_SIZE};
use crate::error::{Error, Result};
use crate::golay::{build_cef, estimate_from_block_pair, golay_pair, TrainingField, CEF_PAIR_LEN};
use crate::phy::fde::{fde_equalize, mmse_bias, NoiseVariance};
use crate::phy::ldpc::{DecodeOutput, LdpcCode, CODEWORD_BITS, DEFAULT_MAX_ITERS, INFO_BITS};
use crate::phy::qpsk::{demap_qpsk, hard_bits, map_qpsk};
use crate::phy::sync::{stf, synchronize, SyncConfig, SyncResult, STF_LEN};
use crate::precoder::DigitalPrecoder;

pub const HEADER_BITS: usize = 64;
/// Header bits are repeated to fill one block of QPSK symbols.
pub const HEADER_REPEAT: usize = 2 * FFT_SIZE / HEADER_BITS;
/// Fixed modulation-and-coding index carried in the header.
pub const MCS_QPSK_R12: u8 = 1;
const PAD_SEED: u64 = 0x5_eed0_f9ad;
const HEADER_SCRAMBLER_SEED: u64 = 0x4ead_e5c5;
const CRC16: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameConfig {
    pub codewords_per_user: usize,
    /// Repetitions of each stream's precoded-CEF pair; at least 2 so the
    /// receiver can measure its noise floor.
    pub pcef_repetitions: usize,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            codewords_per_user: 10,
            pcef_repetitions: 2,
        }
    }
}

/// Sample offsets of every field for a given frame shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub m_rf: usize,
    /// Antennas per sub-array; fixes the training amplitude.
    pub m_sub: usize,
    pub n_users: usize,
    pub config: FrameConfig,
}

impl FrameLayout {
    pub fn new(m_rf: usize, m_sub: usize, n_users: usize, config: FrameConfig) -> Result<Self> {
        if m_sub == 0 {
            return Err(Error::config("bs.subarray", "sub-array without antennas"));
        }
        if n_users == 0 || n_users > m_rf {
            return Err(Error::config("users", format!("{n_users} users for {m_rf} RF chains")));
        }
        if config.codewords_per_user == 0 {
            return Err(Error::config("codewords_per_frame", "must be at least 1"));
        }
        if config.pcef_repetitions < 2 {
            return Err(Error::config("pcef_repetitions", "must be at least 2"));
        }
        Ok(FrameLayout {
            m_rf,
            m_sub,
            n_users,
            config,
        })
    }

    pub fn cef_start(&self) -> usize {
        STF_LEN
    }

    pub fn cef_len(&self) -> usize {
        self.m_rf * 4 * CEF_PAIR_LEN
    }

    pub fn pcef_start(&self) -> usize {
        self.cef_start() + self.cef_len()
    }

    /// Start of the precoded-CEF block for `stream`, repetition `rep`,
    /// sequence `part` (0 = A, 1 = B).
    pub fn pcef_block(&self, stream: usize, rep: usize, part: usize) -> usize {
        self.pcef_start() + ((stream * self.config.pcef_repetitions + rep) * 2 + part) * BLOCK_LEN
    }

    pub fn header_start(&self) -> usize {
        self.pcef_start() + self.n_users * self.config.pcef_repetitions * 2 * BLOCK_LEN
    }

    pub fn data_start(&self) -> usize {
        self.header_start() + BLOCK_LEN
    }

    pub fn data_symbols(&self) -> usize {
        self.config.codewords_per_user * CODEWORD_BITS / 2
    }

    pub fn data_blocks(&self) -> usize {
        self.data_symbols().div_ceil(FFT_SIZE)
    }

    pub fn len(&self) -> usize {
        self.data_start() + self.data_blocks() * BLOCK_LEN
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Constant header: MCS, payload length in codewords, stream index and a
/// CRC-16 over those fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub mcs: u8,
    pub codewords: u16,
    pub user: u8,
}

impl Header {
    fn body(&self) -> [u8; 6] {
        let c = self.codewords.to_be_bytes();
        [self.mcs, c[0], c[1], self.user, 0, 0]
    }

    pub fn to_bits(&self) -> Vec<u8> {
        let body = self.body();
        let crc = CRC16.checksum(&body).to_be_bytes();
        body.iter()
            .chain(&crc)
            .flat_map(|byte| (0..8).rev().map(move |i| (byte >> i) & 1))
            .collect()
    }

    /// `None` when the CRC does not match.
    pub fn from_bits(bits: &[u8]) -> Option<Header> {
        if bits.len() != HEADER_BITS {
            return None;
        }
        let bytes: Vec<u8> = bits
            .chunks(8)
            .map(|c| c.iter().fold(0u8, |acc, b| (acc << 1) | (b & 1)))
            .collect();
        let crc = u16::from_be_bytes([bytes[6], bytes[7]]);
        if CRC16.checksum(&bytes[..6]) != crc {
            return None;
        }
        Some(Header {
            mcs: bytes[0],
            codewords: u16::from_be_bytes([bytes[1], bytes[2]]),
            user: bytes[3],
        })
    }
}

/// One stream's encoded payload.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPayload {
    pub info_bits: Vec<u8>,
    pub coded_bits: Vec<u8>,
    /// QPSK data symbols, without the block padding.
    pub symbols: Vec<Complex64>,
    pub header: Header,
}

/// Deterministic filler symbols completing the last data block.
fn padding_symbols(user: usize, count: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(PAD_SEED);
    rng.set_stream(user as u64);
    let bits: Vec<u8> = (0..2 * count).map(|_| rng.random::<bool>() as u8).collect();
    map_qpsk(&bits).expect("even bit count")
}

/// Per-user whitening sequence over the repeated header. Without it the
/// header block is periodic (16 occupied subcarriers) and the other streams'
/// headers interfere identically in every repetition.
fn header_scrambler(user: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(HEADER_SCRAMBLER_SEED);
    rng.set_stream(user as u64);
    (0..HEADER_BITS * HEADER_REPEAT)
        .map(|_| rng.random::<bool>() as u8)
        .collect()
}

pub fn encode_payload(info_bits: &[u8], user: usize) -> Result<UserPayload> {
    if info_bits.is_empty() || !info_bits.len().is_multiple_of(INFO_BITS) {
        return Err(Error::Dimension(format!(
            "payload of {} bits is not a whole number of {INFO_BITS}-bit codewords",
            info_bits.len()
        )));
    }
    let code = LdpcCode::pinned();
    let mut coded_bits = Vec::with_capacity(2 * info_bits.len());
    for chunk in info_bits.chunks(INFO_BITS) {
        coded_bits.extend(code.encode(chunk)?);
    }
    let codewords = u16::try_from(info_bits.len() / INFO_BITS)
        .map_err(|_| Error::config("codewords_per_frame", "too many codewords for the header field"))?;
    Ok(UserPayload {
        info_bits: info_bits.to_vec(),
        symbols: map_qpsk(&coded_bits)?,
        coded_bits,
        header: Header {
            mcs: MCS_QPSK_R12,
            codewords,
            user: user as u8,
        },
    })
}

/// Spectra (unitary DFT) of the length-512 Golay pair used by the
/// precoded CEF.
pub fn pcef_spectra() -> (Vec<Complex64>, Vec<Complex64>) {
    let pair = golay_pair(FFT_SIZE.trailing_zeros()).expect("valid Golay order");
    let t = BlockTransform::shared();
    (t.forward(&pair.a_complex()), t.forward(&pair.b_complex()))
}

/// A frame at the RF-chain inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TxFrame {
    pub layout: FrameLayout,
    /// `M_RF` baseband streams; antenna `i` of sub-array `j` radiates
    /// `F_A[i, j]` times stream `j`.
    pub chains: Vec<Vec<Complex64>>,
    /// `None` for a muted stream.
    pub payloads: Vec<Option<UserPayload>>,
}

impl TxFrame {
    /// Per-antenna samples `F_A · z(t)`.
    pub fn antenna_streams(&self, f_a: &HybridAnalogMatrix) -> Result<Vec<Vec<Complex64>>> {
        if f_a.m_rf() != self.chains.len() {
            return Err(Error::Dimension("analog stage and frame disagree on M_RF".into()));
        }
        let m_sub = f_a.m_sub();
        Ok((0..f_a.m())
            .map(|a| {
                let chain = a / m_sub;
                let w = f_a.subarray(chain).weights[a % m_sub];
                self.chains[chain].iter().map(|z| w * z).collect()
            })
            .collect())
    }
}

fn scale_into(dst: &mut [Complex64], src: &[Complex64], gain: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = s * gain;
    }
}

/// Writes the STF and non-precoded CEF, normalized so the radiated power
/// summed over all `M_RF·m_sub` antennas is 1 per sample.
fn write_preamble(chains: &mut [Vec<Complex64>], m_sub: usize) -> Result<TrainingField> {
    let m_rf = chains.len();
    let stf = stf();
    for chain in chains.iter_mut() {
        scale_into(&mut chain[..STF_LEN], &stf, 1.0 / ((m_sub * m_rf) as f64).sqrt());
    }
    let mut field = build_cef(m_rf, CEF_PAIR_LEN)?;
    field.amplitude = 1.0 / (m_sub as f64).sqrt();
    for (i, chain) in chains.iter_mut().enumerate() {
        scale_into(
            &mut chain[STF_LEN..STF_LEN + field.len()],
            field.signal(i),
            field.amplitude,
        );
    }
    Ok(field)
}

/// Channel-sounding burst: STF followed by the non-precoded CEF.
pub fn build_sounding(m_rf: usize, m_sub: usize) -> Result<(Vec<Vec<Complex64>>, TrainingField)> {
    if m_rf == 0 || m_sub == 0 {
        return Err(Error::Domain("empty array".into()));
    }
    let len = STF_LEN + m_rf * 4 * CEF_PAIR_LEN;
    let mut chains = vec![vec![Complex64::new(0.0, 0.0); len]; m_rf];
    let field = write_preamble(&mut chains, m_sub)?;
    Ok((chains, field))
}

/// Builds the frame at the RF-chain inputs. `user_bits[u]` empty mutes
/// stream `u` in the header and data fields.
pub fn build_frame_chains(
    user_bits: &[Vec<u8>],
    f_d: &DigitalPrecoder,
    m_sub: usize,
    config: FrameConfig,
) -> Result<TxFrame> {
    let layout = FrameLayout::new(f_d.m_rf(), m_sub, user_bits.len(), config)?;
    if f_d.n_users() != user_bits.len() {
        return Err(Error::Dimension(format!(
            "precoder serves {} streams, {} payloads given",
            f_d.n_users(),
            user_bits.len()
        )));
    }
    let expected = config.codewords_per_user * INFO_BITS;
    let payloads = user_bits
        .iter()
        .enumerate()
        .map(|(u, bits)| {
            if bits.is_empty() {
                return Ok(None);
            }
            if bits.len() != expected {
                return Err(Error::Dimension(format!(
                    "user {u} payload has {} bits, frame carries {expected}",
                    bits.len()
                )));
            }
            encode_payload(bits, u).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;

    let (m_rf, k_users) = (layout.m_rf, layout.n_users);
    let zero = Complex64::new(0.0, 0.0);
    let mut chains = vec![vec![zero; layout.len()]; m_rf];
    write_preamble(&mut chains, m_sub)?;

    let t = BlockTransform::shared();
    let alpha = Complex64::new(f_d.alpha, 0.0);
    // Writes one block given the per-stream spectra `s[u][k]`.
    let mut write_block = |start: usize, spectra: &[Vec<Complex64>]| -> Result<()> {
        let mut freq = vec![vec![zero; FFT_SIZE]; m_rf];
        let mut s = DVector::<Complex64>::zeros(k_users);
        for k in 0..FFT_SIZE {
            for (u, sp) in spectra.iter().enumerate() {
                s[u] = sp[k];
            }
            let z = f_d.at(k) * &s * alpha;
            for (i, f) in freq.iter_mut().enumerate() {
                f[k] = z[i];
            }
        }
        for (chain, f) in chains.iter_mut().zip(freq) {
            chain[start..start + BLOCK_LEN].copy_from_slice(&add_cp(&t.inverse(&f))?);
        }
        Ok(())
    };

    let (spec_a, spec_b) = pcef_spectra();
    let boost = (k_users as f64).sqrt();
    for v in 0..k_users {
        for rep in 0..config.pcef_repetitions {
            for (part, spec) in [&spec_a, &spec_b].into_iter().enumerate() {
                let mut spectra = vec![vec![zero; FFT_SIZE]; k_users];
                spectra[v] = spec.iter().map(|x| x * boost).collect();
                write_block(layout.pcef_block(v, rep, part), &spectra)?;
            }
        }
    }

    let stream_blocks =
        |symbols_of: &dyn Fn(&UserPayload) -> Vec<Complex64>, blocks: usize| -> Vec<Vec<Vec<Complex64>>> {
            // [block][user][k]
            (0..blocks)
                .map(|b| {
                    payloads
                        .iter()
                        .map(|p| match p {
                            Some(p) => t.forward(&symbols_of(p)[b * FFT_SIZE..(b + 1) * FFT_SIZE]),
                            None => vec![zero; FFT_SIZE],
                        })
                        .collect()
                })
                .collect()
        };

    let header_symbols = |p: &UserPayload| {
        let bits: Vec<u8> = (0..HEADER_REPEAT)
            .flat_map(|_| p.header.to_bits())
            .zip(header_scrambler(p.header.user as usize))
            .map(|(b, w)| b ^ w)
            .collect();
        map_qpsk(&bits).expect("even bit count")
    };
    let n_blocks = layout.data_blocks();
    let data_symbols = |p: &UserPayload| {
        let mut s = p.symbols.clone();
        let u = p.header.user as usize;
        s.extend(padding_symbols(u, n_blocks * FFT_SIZE - s.len()));
        s
    };
    let header = stream_blocks(&header_symbols, 1);
    let data = stream_blocks(&data_symbols, n_blocks);
    write_block(layout.header_start(), &header[0])?;
    for (b, spectra) in data.iter().enumerate() {
        write_block(layout.data_start() + b * BLOCK_LEN, spectra)?;
    }

    Ok(TxFrame {
        layout,
        chains,
        payloads,
    })
}

/// Per-antenna time-domain samples of a full frame.
pub fn build_frame(
    user_bits: &[Vec<u8>],
    f_d: &DigitalPrecoder,
    f_a: &HybridAnalogMatrix,
    config: FrameConfig,
) -> Result<Vec<Vec<Complex64>>> {
    if f_a.m_rf() != f_d.m_rf() {
        return Err(Error::Dimension("analog and digital stages disagree on M_RF".into()));
    }
    build_frame_chains(user_bits, f_d, f_a.m_sub(), config)?.antenna_streams(f_a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverConfig {
    pub sync: SyncConfig,
    /// Samples by which the block timing is placed before the strongest
    /// correlation peak, so that earlier, weaker paths stay causal.
    pub timing_backoff: usize,
    /// Half-width (subcarriers) of the smoothing applied to the measured
    /// interference power.
    pub interference_smoothing: usize,
    pub max_iters: usize,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig {
            sync: SyncConfig::default(),
            timing_backoff: 8,
            interference_smoothing: 4,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

fn frame_start(sync: &SyncResult, cfg: &ReceiverConfig) -> usize {
    sync.index.saturating_sub(cfg.timing_backoff)
}

/// Result of receiving a sounding burst at one user.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundingReception {
    pub sync: SyncResult,
    /// `row[i][k]`: reduced-channel estimate from chain `i`.
    pub row: Vec<Vec<Complex64>>,
}

fn estimate_row(rx: &[Complex64], start: usize, field: &TrainingField) -> Result<Vec<Vec<Complex64>>> {
    let window = rx
        .get(start..)
        .ok_or_else(|| Error::Framing("training starts past the end of the capture".into()))?;
    (0..field.m_rf())
        .map(|i| {
            let taps: Vec<(usize, Complex64)> = field.estimate_taps(window, i)?.into_iter().enumerate().collect();
            Ok(crate::block::taps_to_response(&taps, FFT_SIZE))
        })
        .collect()
}

pub fn receive_sounding(rx: &[Complex64], field: &TrainingField, cfg: &ReceiverConfig) -> Result<SoundingReception> {
    let sync = synchronize(rx, &cfg.sync)?;
    let start = frame_start(&sync, cfg) + STF_LEN;
    Ok(SoundingReception {
        sync,
        row: estimate_row(rx, start, field)?,
    })
}

/// Everything one user's receiver produced for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct UserReception {
    pub sync: SyncResult,
    /// Non-precoded reduced-channel row estimate, `[chain][k]`.
    pub reduced_row: Vec<Vec<Complex64>>,
    /// Precoded channel of this user's own stream.
    pub precoded_gain: Vec<Complex64>,
    /// Precoded leakage from every stream, `[stream][k]` (own stream included).
    pub stream_gains: Vec<Vec<Complex64>>,
    /// Estimated noise variance per subcarrier (white).
    pub noise_var: f64,
    /// Noise plus residual multi-user interference, per subcarrier.
    pub disturbance: Vec<f64>,
    pub header: Option<Header>,
    /// MMSE-equalized data symbols (padding removed).
    pub eq_symbols: Vec<Complex64>,
    pub llrs: Vec<f64>,
    pub decoded: Vec<DecodeOutput>,
}

impl UserReception {
    pub fn info_bits(&self) -> Vec<u8> {
        self.decoded.iter().flat_map(|d| d.info.iter().copied()).collect()
    }

    pub fn coded_hard_bits(&self) -> Vec<u8> {
        hard_bits(&self.llrs)
    }
}

fn circular_smooth(x: &[f64], half: usize) -> Vec<f64> {
    let n = x.len();
    if half == 0 {
        return x.to_vec();
    }
    let width = (2 * half + 1) as f64;
    (0..n)
        .map(|k| (0..=2 * half).map(|j| x[(k + n + j - half) % n]).sum::<f64>() / width)
        .collect()
}

/// Receives `user`'s stream from its combiner output `rx` (which must hold
/// the whole frame after the search window).
pub fn receive(rx: &[Complex64], layout: &FrameLayout, user: usize, cfg: &ReceiverConfig) -> Result<UserReception> {
    if user >= layout.n_users {
        return Err(Error::Domain(format!(
            "user {user} not in a {}-user frame",
            layout.n_users
        )));
    }
    let sync = synchronize(rx, &cfg.sync)?;
    let start = frame_start(&sync, cfg);
    if start + layout.len() > rx.len() {
        return Err(Error::Framing(format!(
            "frame at {start} needs {} samples, capture has {}",
            layout.len(),
            rx.len()
        )));
    }
    let t = BlockTransform::shared();
    let block_spectrum = |offset: usize| -> Result<Vec<Complex64>> { Ok(t.forward(strip_cp(rx, start + offset)?)) };

    let mut field = build_cef(layout.m_rf, CEF_PAIR_LEN)?;
    field.amplitude = 1.0 / (layout.m_sub as f64).sqrt();
    let reduced_row = estimate_row(rx, start + layout.cef_start(), &field)?;

    // Precoded CEF: per-stream gains and the white-noise floor.
    let (spec_a, spec_b) = pcef_spectra();
    let reps = layout.config.pcef_repetitions;
    let k_users = layout.n_users;
    let boost = (k_users as f64).sqrt();
    let mut stream_gains = Vec::with_capacity(k_users);
    let (mut spread, mut spread_count) = (0.0, 0usize);
    for v in 0..k_users {
        let mut mean = [
            vec![Complex64::new(0.0, 0.0); FFT_SIZE],
            vec![Complex64::new(0.0, 0.0); FFT_SIZE],
        ];
        let mut observed = [Vec::with_capacity(reps), Vec::with_capacity(reps)];
        for rep in 0..reps {
            for part in 0..2 {
                let y = block_spectrum(layout.pcef_block(v, rep, part))?;
                mean[part].iter_mut().zip(&y).for_each(|(m, y)| *m += y / reps as f64);
                observed[part].push(y);
            }
        }
        for part in 0..2 {
            for y in &observed[part] {
                spread += y.iter().zip(&mean[part]).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
            }
            spread_count += FFT_SIZE * (reps - 1);
        }
        let g: Vec<Complex64> = estimate_from_block_pair(&mean[0], &mean[1], &spec_a, &spec_b)
            .into_iter()
            .map(|x| x / boost)
            .collect();
        stream_gains.push(g);
    }
    let noise_var = spread / spread_count as f64;
    let estimate_noise = noise_var / (2.0 * reps as f64 * k_users as f64);
    let leakage: Vec<f64> = (0..FFT_SIZE)
        .map(|k| {
            (0..k_users)
                .filter(|&v| v != user)
                .map(|v| stream_gains[v][k].norm_sqr() - estimate_noise)
                .sum()
        })
        .collect();
    let disturbance: Vec<f64> = circular_smooth(&leakage, cfg.interference_smoothing)
        .into_iter()
        .map(|i| noise_var + i.max(0.0))
        .collect();
    let precoded_gain = stream_gains[user].clone();
    let nv = NoiseVariance::PerSubcarrier(disturbance.clone());
    let mu = mmse_bias(&precoded_gain, &nv);
    let v_eff = if mu > 0.0 {
        ((1.0 - mu) / mu).max(1e-9)
    } else {
        f64::INFINITY
    };

    let equalize =
        |offset: usize| -> Result<Vec<Complex64>> { fde_equalize(&block_spectrum(offset)?, &precoded_gain, &nv) };
    let llrs_of = |eq: &[Complex64]| -> Result<Vec<f64>> {
        if !v_eff.is_finite() {
            return Ok(vec![0.0; 2 * eq.len()]);
        }
        let unbiased: Vec<Complex64> = eq.iter().map(|z| z / mu).collect();
        demap_qpsk(&unbiased, v_eff)
    };

    let header_llrs = llrs_of(&equalize(layout.header_start())?)?;
    let mut combined = vec![0.0; HEADER_BITS];
    for (i, (l, w)) in header_llrs.iter().zip(header_scrambler(user)).enumerate() {
        combined[i % HEADER_BITS] += if w == 1 { -l } else { *l };
    }
    let header = Header::from_bits(&hard_bits(&combined));

    let n_sym = layout.data_symbols();
    let mut eq_symbols = Vec::with_capacity(layout.data_blocks() * FFT_SIZE);
    for b in 0..layout.data_blocks() {
        eq_symbols.extend(equalize(layout.data_start() + b * BLOCK_LEN)?);
    }
    eq_symbols.truncate(n_sym);
    let llrs = llrs_of(&eq_symbols)?;
    let code = LdpcCode::pinned();
    let decoded = llrs
        .chunks(CODEWORD_BITS)
        .map(|cw| code.decode(cw, cfg.max_iters))
        .collect::<Result<Vec<_>>>()?;

    Ok(UserReception {
        sync,
        reduced_row,
        precoded_gain,
        stream_gains,
        noise_var,
        disturbance,
        header,
        eq_symbols,
        llrs,
        decoded,
    })
}
