//! In-place radix-2 complex FFT used by the ramp filter.

/// Forward (inverse=false) or inverse (inverse=true) FFT of a power-of-two
/// length signal given as separate real/imaginary slices. The inverse
/// transform includes the 1/N normalization.
pub fn fft_inplace(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    assert_eq!(n, im.len());
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    if n <= 1 {
        return;
    }

    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * core::f64::consts::PI / len as f64;
        let (wr, wi) = (libm::cos(ang), libm::sin(ang));
        let mut start = 0;
        while start < n {
            let mut cr = 1.0;
            let mut ci = 0.0;
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let tr = re[b] * cr - im[b] * ci;
                let ti = re[b] * ci + im[b] * cr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                let ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
            start += len;
        }
        len <<= 1;
    }

    if inverse {
        let inv_n = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= inv_n;
        }
        for v in im.iter_mut() {
            *v *= inv_n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn roundtrip_recovers_signal() {
        let x = [1.0, -2.0, 3.5, 0.25, -1.0, 4.0, 0.0, 2.0];
        let mut re = x.to_vec();
        let mut im = vec![0.0; 8];
        fft_inplace(&mut re, &mut im, false);
        fft_inplace(&mut re, &mut im, true);
        for (a, b) in re.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
        for v in &im {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_dft() {
        let n = 16;
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for (i, v) in re.iter_mut().enumerate() {
            *v = (i as f64 * 0.7).sin() + 0.3 * i as f64;
        }
        let input = re.clone();
        fft_inplace(&mut re, &mut im, false);
        for k in 0..n {
            let mut sr = 0.0;
            let mut si = 0.0;
            for (j, x) in input.iter().enumerate() {
                let ang = -2.0 * core::f64::consts::PI * (k * j) as f64 / n as f64;
                sr += x * ang.cos();
                si += x * ang.sin();
            }
            assert!((re[k] - sr).abs() < 1e-10, "re[{k}]");
            assert!((im[k] - si).abs() < 1e-10, "im[{k}]");
        }
    }
}
