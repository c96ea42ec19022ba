//! FFT helpers shared by the differentiation, solver and phase-space code.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT, `X_k = sum_j x_j e^{-2 pi i jk/n}`.
pub fn fft(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Inverse DFT including the `1/n` factor.
pub fn ifft(buf: &mut [Complex64]) {
    let n = buf.len();
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    plan.process(buf);
    let s = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// Integer frequency index of DFT bin `j` in `[-n/2, n/2)`.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Angular wavenumbers of the DFT bins for spacing `dx`; the Nyquist bin gets `-pi/dx`.
pub fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * dx);
    (0..n).map(|j| signed_index(j, n) as f64 * dk).collect()
}

/// Spectral derivative of order 1 or 2 of a periodic lane.
///
/// First derivatives zero the Nyquist bin, which has no odd partner.
pub fn differentiate(lane: &[Complex64], dx: f64, order: u8) -> Vec<Complex64> {
    let n = lane.len();
    let mut buf = lane.to_vec();
    fft(&mut buf);
    let k = wavenumbers(n, dx);
    for (j, v) in buf.iter_mut().enumerate() {
        let mult = match order {
            0 => Complex64::new(1.0, 0.0),
            1 if j == n / 2 => Complex64::new(0.0, 0.0),
            1 => Complex64::new(0.0, k[j]),
            2 => Complex64::new(-k[j] * k[j], 0.0),
            _ => panic!("derivative order {order} not supported"),
        };
        *v *= mult;
    }
    ifft(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let orig: Vec<Complex64> = (0..64)
            .map(|j| Complex64::new(j as f64, -(j as f64).sin()))
            .collect();
        let mut buf = orig.clone();
        fft(&mut buf);
        ifft(&mut buf);
        for (a, b) in orig.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn wavenumber_layout() {
        let k = wavenumbers(8, 0.5);
        let dk = 2.0 * PI / 4.0;
        assert_eq!(k[1], dk);
        assert_eq!(k[4], -4.0 * dk);
        assert_eq!(k[7], -dk);
    }

    #[test]
    fn plane_wave_derivative() {
        let n = 64;
        let dx = 2.0 * PI / n as f64;
        let lane: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, 3.0 * j as f64 * dx))
            .collect();
        let d = differentiate(&lane, dx, 1);
        for (f, df) in lane.iter().zip(&d) {
            assert!((df - Complex64::new(0.0, 3.0) * f).norm() < 1e-12);
        }
    }
}
