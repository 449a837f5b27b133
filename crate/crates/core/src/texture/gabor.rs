//! A 7 x 7 bank of complex Gabor filters and per-frame energy vectors.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ingest::Frame;

pub const N_FREQUENCIES: usize = 7;
pub const N_ORIENTATIONS: usize = 7;
pub const GABOR_DIM: usize = N_FREQUENCIES * N_ORIENTATIONS;

/// Envelope width per level is `sigma_factor / frequency`.
pub const DEFAULT_SIGMA_FACTOR: f64 = 0.56;

/// One complex kernel stored as separate real and imaginary planes.
#[derive(Debug, Clone)]
pub struct GaborKernel {
    pub frequency: f64,
    pub orientation: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GaborBank {
    kernel_size: usize,
    frequencies: [f64; N_FREQUENCIES],
    orientations: [f64; N_ORIENTATIONS],
    /// Indexed by `f * N_ORIENTATIONS + o`.
    filters: Vec<GaborKernel>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborConfig {
    pub kernel_size: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub sigma_factor: f64,
}

impl Default for GaborConfig {
    fn default() -> Self {
        GaborConfig {
            kernel_size: 31,
            f_min: 0.04,
            f_max: 0.4,
            sigma_factor: DEFAULT_SIGMA_FACTOR,
        }
    }
}

/// Index of filter `(frequency level, orientation index)` in an energy vector.
pub fn filter_index(freq: usize, orient: usize) -> usize {
    freq * N_ORIENTATIONS + orient
}

impl GaborBank {
    pub fn new(kernel_size: usize, f_min: f64, f_max: f64) -> Result<Self> {
        Self::from_config(&GaborConfig {
            kernel_size,
            f_min,
            f_max,
            sigma_factor: DEFAULT_SIGMA_FACTOR,
        })
    }

    pub fn from_config(cfg: &GaborConfig) -> Result<Self> {
        let GaborConfig {
            kernel_size,
            f_min,
            f_max,
            sigma_factor,
        } = *cfg;
        if kernel_size < 7 || kernel_size % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "kernel size must be odd and >= 7, got {kernel_size}"
            )));
        }
        if !(f_min > 0.0 && f_min < f_max && f_max <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < f_min < f_max <= 0.5, got [{f_min}, {f_max}]"
            )));
        }
        if !(sigma_factor > 0.0 && sigma_factor.is_finite()) {
            return Err(Error::InvalidArgument(
                "sigma factor must be positive".into(),
            ));
        }
        let ratio = (f_max / f_min).powf(1.0 / (N_FREQUENCIES - 1) as f64);
        let mut frequencies = [0.0; N_FREQUENCIES];
        for (k, f) in frequencies.iter_mut().enumerate() {
            *f = f_min * ratio.powi(k as i32);
        }
        frequencies[N_FREQUENCIES - 1] = f_max;
        let orientations: [f64; N_ORIENTATIONS] =
            std::array::from_fn(|k| k as f64 * PI / N_ORIENTATIONS as f64);

        let mut filters = Vec::with_capacity(GABOR_DIM);
        for &f in &frequencies {
            for &theta in &orientations {
                filters.push(make_kernel(kernel_size, f, theta, sigma_factor / f));
            }
        }
        Ok(GaborBank {
            kernel_size,
            frequencies,
            orientations,
            filters,
        })
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    pub fn frequencies(&self) -> &[f64; N_FREQUENCIES] {
        &self.frequencies
    }

    pub fn orientations(&self) -> &[f64; N_ORIENTATIONS] {
        &self.orientations
    }

    pub fn filters(&self) -> &[GaborKernel] {
        &self.filters
    }
}

fn make_kernel(size: usize, f: f64, theta: f64, sigma: f64) -> GaborKernel {
    let half = (size / 2) as isize;
    let (ct, st) = (theta.cos(), theta.sin());
    let n = size * size;
    let mut env = Vec::with_capacity(n);
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for y in -half..=half {
        for x in -half..=half {
            let (xf, yf) = (x as f64, y as f64);
            let g = (-(xf * xf + yf * yf) / (2.0 * sigma * sigma)).exp();
            let phase = 2.0 * PI * f * (xf * ct + yf * st);
            env.push(g);
            re.push(g * phase.cos());
            im.push(g * phase.sin());
        }
    }
    // Remove the DC response of the real part by subtracting a scaled envelope,
    // then normalise so the envelope sums to one.
    let env_sum: f64 = env.iter().sum();
    let dc = re.iter().sum::<f64>() / env_sum;
    for (r, g) in re.iter_mut().zip(&env) {
        *r = (*r - dc * g) / env_sum;
    }
    for v in im.iter_mut() {
        *v /= env_sum;
    }
    // The imaginary part is odd-symmetric; make its sum exactly zero too.
    let im_mean = im.iter().sum::<f64>() / n as f64;
    if im_mean != 0.0 {
        for v in im.iter_mut() {
            *v -= im_mean;
        }
    }
    GaborKernel {
        frequency: f,
        orientation: theta,
        re,
        im,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborEnergyVector {
    pub e: [f64; GABOR_DIM],
}

impl GaborEnergyVector {
    pub fn new(e: [f64; GABOR_DIM]) -> Result<Self> {
        if e.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "gabor energies must be finite and >= 0".into(),
            ));
        }
        Ok(GaborEnergyVector { e })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.e
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.e.iter().enumerate() {
            if v > self.e[best] {
                best = i;
            }
        }
        best
    }
}

/// Mean squared magnitude of each filter's response over the pixels where the
/// kernel fits entirely inside the frame. Grey levels are scaled to [0,1].
pub fn gabor_energy_vector(frame: &Frame, bank: &GaborBank) -> Result<GaborEnergyVector> {
    let k = bank.kernel_size;
    let (w, h) = (frame.width(), frame.height());
    if w < k || h < k {
        return Err(Error::InvalidArgument(format!(
            "frame {w}x{h} smaller than {k}x{k} kernel"
        )));
    }
    let grey: Vec<f64> = frame.grey().iter().map(|&g| g as f64 / 255.0).collect();
    let (out_w, out_h) = (w - k + 1, h - k + 1);
    let count = (out_w * out_h) as f64;
    let mut e = [0.0; GABOR_DIM];
    for (slot, kernel) in e.iter_mut().zip(&bank.filters) {
        let mut acc = 0.0;
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut re = 0.0;
                let mut im = 0.0;
                for ky in 0..k {
                    let row = &grey[(oy + ky) * w + ox..(oy + ky) * w + ox + k];
                    let kr = &kernel.re[ky * k..(ky + 1) * k];
                    let ki = &kernel.im[ky * k..(ky + 1) * k];
                    for ((&p, &a), &b) in row.iter().zip(kr).zip(ki) {
                        re += p * a;
                        im += p * b;
                    }
                }
                acc += re * re + im * im;
            }
        }
        *slot = acc / count;
    }
    GaborEnergyVector::new(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn grating(size: usize, f: f64, theta: f64) -> Frame {
        let grey = (0..size * size)
            .map(|i| {
                let (x, y) = ((i % size) as f64, (i / size) as f64);
                let v = 128.0 + 100.0 * (2.0 * PI * f * (x * theta.cos() + y * theta.sin())).cos();
                v.round() as u8
            })
            .collect();
        Frame::from_grey(size, size, grey).unwrap()
    }

    #[test]
    fn default_bank_contract() {
        let bank = GaborBank::new(31, 0.04, 0.4).unwrap();
        assert_eq!(bank.filters().len(), 49);
        for (k, &o) in bank.orientations().iter().enumerate() {
            assert!((o - k as f64 * PI / 7.0).abs() < 1e-12);
        }
        assert!(bank.frequencies().windows(2).all(|w| w[0] < w[1]));
        assert!((bank.frequencies()[0] - 0.04).abs() < 1e-12);
        assert!((bank.frequencies()[6] - 0.4).abs() < 1e-12);
        for kernel in bank.filters() {
            assert!(kernel.re.iter().sum::<f64>().abs() < 1e-6);
            assert!(kernel.im.iter().sum::<f64>().abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_banks() {
        assert!(GaborBank::new(31, 0.2, 0.2).is_err());
        assert!(GaborBank::new(31, 0.3, 0.2).is_err());
        assert!(GaborBank::new(30, 0.04, 0.4).is_err());
        assert!(GaborBank::new(5, 0.04, 0.4).is_err());
        assert!(GaborBank::new(31, 0.04, 0.6).is_err());
    }

    #[test]
    fn constant_frame_has_no_energy() {
        let bank = GaborBank::new(15, 0.08, 0.4).unwrap();
        let f = Frame::from_grey(24, 24, vec![173; 24 * 24]).unwrap();
        let e = gabor_energy_vector(&f, &bank).unwrap();
        assert!(e.e.iter().all(|&v| v < 1e-9), "{:?}", e.e);
    }

    #[test]
    fn too_small_frame() {
        let bank = GaborBank::new(15, 0.08, 0.4).unwrap();
        let f = Frame::from_grey(10, 20, vec![0; 200]).unwrap();
        assert!(gabor_energy_vector(&f, &bank).is_err());
    }

    #[test]
    fn grating_selects_matching_filter() {
        let bank = GaborBank::new(15, 0.08, 0.4).unwrap();
        let f3 = bank.frequencies()[3];
        let frame = grating(40, f3, PI / 7.0);
        let e = gabor_energy_vector(&frame, &bank).unwrap();
        assert_eq!(e.argmax(), filter_index(3, 1));
    }

    #[test]
    fn noise_excites_every_filter() {
        let bank = GaborBank::new(15, 0.08, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let grey = (0..32 * 32).map(|_| rng.gen()).collect();
        let f = Frame::from_grey(32, 32, grey).unwrap();
        let e = gabor_energy_vector(&f, &bank).unwrap();
        assert!(e.e.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn invariant_to_brightness_offset() {
        let bank = GaborBank::new(15, 0.08, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grey: Vec<u8> = (0..24 * 24).map(|_| rng.gen_range(20..200)).collect();
        let shifted: Vec<u8> = grey.iter().map(|g| g + 40).collect();
        let a = gabor_energy_vector(&Frame::from_grey(24, 24, grey).unwrap(), &bank).unwrap();
        let b = gabor_energy_vector(&Frame::from_grey(24, 24, shifted).unwrap(), &bank).unwrap();
        for (x, y) in a.e.iter().zip(&b.e) {
            assert!((x - y).abs() <= 1e-6 * x.max(*y), "{x} vs {y}");
        }
    }
}
