//! Layer kernels: convolution (im2col + GEMM), per-channel PReLU and
//! inverted dropout, each with its backward pass.

use rand::Rng;

use super::tensor::Tensor4;

/// Static geometry of one convolution applied to a fixed input size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub in_c: usize,
    pub out_c: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad_h: usize,
    pub pad_w: usize,
    pub in_h: usize,
    pub in_w: usize,
}

impl ConvGeom {
    pub fn out_h(&self) -> usize {
        (self.in_h + 2 * self.pad_h - self.kh) / self.stride + 1
    }

    pub fn out_w(&self) -> usize {
        (self.in_w + 2 * self.pad_w - self.kw) / self.stride + 1
    }

    /// Rows of the unfolded input (= weights per output channel).
    pub fn patch_len(&self) -> usize {
        self.in_c * self.kh * self.kw
    }

    pub fn weight_len(&self) -> usize {
        self.out_c * self.patch_len()
    }

    /// True when the kernel fits inside the padded input.
    pub fn fits(&self) -> bool {
        self.stride >= 1
            && self.kh >= 1
            && self.kw >= 1
            && self.kh <= self.in_h + 2 * self.pad_h
            && self.kw <= self.in_w + 2 * self.pad_w
    }
}

/// `c = a·b + beta·c` with optional transposes, all row-major.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    beta: f64,
    c: &mut [f64],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the strides above address exactly the m×k, k×n and m×n
    // row-major blocks whose lengths were asserted.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Unfolds one sample into `[patch_len][out_h*out_w]`.
fn im2col(g: &ConvGeom, x: &[f64], cols: &mut [f64]) {
    let (oh, ow) = (g.out_h(), g.out_w());
    let p = oh * ow;
    for c in 0..g.in_c {
        let plane = &x[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let row = ((c * g.kh + ky) * g.kw + kx) * p;
                for oy in 0..oh {
                    let iy = (oy * g.stride + ky) as isize - g.pad_h as isize;
                    let dst = &mut cols[row + oy * ow..row + (oy + 1) * ow];
                    if iy < 0 || iy >= g.in_h as isize {
                        dst.fill(0.0);
                        continue;
                    }
                    let src = &plane[iy as usize * g.in_w..(iy as usize + 1) * g.in_w];
                    for (ox, d) in dst.iter_mut().enumerate() {
                        let ix = (ox * g.stride + kx) as isize - g.pad_w as isize;
                        *d = if ix < 0 || ix >= g.in_w as isize {
                            0.0
                        } else {
                            src[ix as usize]
                        };
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`], accumulating into `dx`.
fn col2im(g: &ConvGeom, cols: &[f64], dx: &mut [f64]) {
    let (oh, ow) = (g.out_h(), g.out_w());
    let p = oh * ow;
    for c in 0..g.in_c {
        let plane = &mut dx[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let row = ((c * g.kh + ky) * g.kw + kx) * p;
                for oy in 0..oh {
                    let iy = (oy * g.stride + ky) as isize - g.pad_h as isize;
                    if iy < 0 || iy >= g.in_h as isize {
                        continue;
                    }
                    let base = iy as usize * g.in_w;
                    for ox in 0..ow {
                        let ix = (ox * g.stride + kx) as isize - g.pad_w as isize;
                        if ix >= 0 && ix < g.in_w as isize {
                            plane[base + ix as usize] += cols[row + oy * ow + ox];
                        }
                    }
                }
            }
        }
    }
}

/// `weight` is `[out_c][in_c][kh][kw]`, `bias` is `[out_c]`.
pub fn conv_forward(g: &ConvGeom, weight: &[f64], bias: &[f64], x: &Tensor4) -> Tensor4 {
    assert_eq!((x.c(), x.h(), x.w()), (g.in_c, g.in_h, g.in_w));
    let (oh, ow) = (g.out_h(), g.out_w());
    let p = oh * ow;
    let k = g.patch_len();
    let mut cols = vec![0.0; k * p];
    let mut out = vec![0.0; x.n() * g.out_c * p];
    for i in 0..x.n() {
        im2col(g, x.sample(i), &mut cols);
        let y = &mut out[i * g.out_c * p..(i + 1) * g.out_c * p];
        for (o, chunk) in y.chunks_mut(p).enumerate() {
            chunk.fill(bias[o]);
        }
        gemm(g.out_c, k, p, weight, false, &cols, false, 1.0, y);
    }
    Tensor4::from_raw(x.n(), g.out_c, oh, ow, out)
}

/// Returns the input gradient and accumulates weight and bias gradients.
pub fn conv_backward(
    g: &ConvGeom,
    weight: &[f64],
    x: &Tensor4,
    dy: &Tensor4,
    dweight: &mut [f64],
    dbias: &mut [f64],
) -> Tensor4 {
    let (oh, ow) = (g.out_h(), g.out_w());
    let p = oh * ow;
    let k = g.patch_len();
    assert_eq!(dy.shape(), (x.n(), g.out_c, oh, ow));
    let mut cols = vec![0.0; k * p];
    let mut dcols = vec![0.0; k * p];
    let mut dx = vec![0.0; x.n() * x.sample_len()];
    for i in 0..x.n() {
        let d = dy.sample(i);
        for (o, chunk) in d.chunks(p).enumerate() {
            dbias[o] += chunk.iter().sum::<f64>();
        }
        im2col(g, x.sample(i), &mut cols);
        // dW += dY · colsᵀ
        gemm(g.out_c, p, k, d, false, &cols, true, 1.0, dweight);
        // dcols = Wᵀ · dY
        gemm(k, g.out_c, p, weight, true, d, false, 0.0, &mut dcols);
        let s = x.sample_len();
        col2im(g, &dcols, &mut dx[i * s..(i + 1) * s]);
    }
    Tensor4::from_raw(x.n(), x.c(), x.h(), x.w(), dx)
}

/// `max(0, x) + a_c · min(0, x)` with one slope per channel.
pub fn prelu_forward(slopes: &[f64], x: &Tensor4) -> Tensor4 {
    assert_eq!(slopes.len(), x.c());
    let plane = x.h() * x.w();
    let mut out = x.data().to_vec();
    for (j, chunk) in out.chunks_mut(plane).enumerate() {
        let a = slopes[j % x.c()];
        for v in chunk {
            if *v < 0.0 {
                *v *= a;
            }
        }
    }
    Tensor4::from_raw(x.n(), x.c(), x.h(), x.w(), out)
}

pub fn prelu_backward(slopes: &[f64], x: &Tensor4, dy: &Tensor4, dslopes: &mut [f64]) -> Tensor4 {
    let plane = x.h() * x.w();
    let mut dx = dy.data().to_vec();
    for (j, (dchunk, xchunk)) in dx.chunks_mut(plane).zip(x.data().chunks(plane)).enumerate() {
        let c = j % x.c();
        let a = slopes[c];
        let mut ds = 0.0;
        for (d, &v) in dchunk.iter_mut().zip(xchunk) {
            if v < 0.0 {
                ds += *d * v;
                *d *= a;
            }
        }
        dslopes[c] += ds;
    }
    Tensor4::from_raw(x.n(), x.c(), x.h(), x.w(), dx)
}

/// Inverted-dropout mask: each unit kept with probability `1 - p` and
/// scaled by `1 / (1 - p)`, so the expected activation is unchanged.
pub fn dropout_mask(rng: &mut impl Rng, p: f64, len: usize) -> Vec<f64> {
    let keep = 1.0 / (1.0 - p);
    (0..len)
        .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
        .collect()
}

/// Elementwise product with a mask; used for both directions of dropout.
pub fn apply_mask(mask: &[f64], x: &Tensor4) -> Tensor4 {
    assert_eq!(mask.len(), x.data().len());
    let data = x.data().iter().zip(mask).map(|(v, m)| v * m).collect();
    Tensor4::from_raw(x.n(), x.c(), x.h(), x.w(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Direct nested-loop convolution.
    fn naive_conv(g: &ConvGeom, w: &[f64], b: &[f64], x: &Tensor4) -> Vec<f64> {
        let mut out = Vec::new();
        for n in 0..x.n() {
            for o in 0..g.out_c {
                for oy in 0..g.out_h() {
                    for ox in 0..g.out_w() {
                        let mut s = b[o];
                        for c in 0..g.in_c {
                            for ky in 0..g.kh {
                                for kx in 0..g.kw {
                                    let iy = (oy * g.stride + ky) as isize - g.pad_h as isize;
                                    let ix = (ox * g.stride + kx) as isize - g.pad_w as isize;
                                    if iy >= 0 && ix >= 0 && (iy as usize) < g.in_h && (ix as usize) < g.in_w {
                                        s += w[((o * g.in_c + c) * g.kh + ky) * g.kw + kx]
                                            * x.at(n, c, iy as usize, ix as usize);
                                    }
                                }
                            }
                        }
                        out.push(s);
                    }
                }
            }
        }
        out
    }

    fn geom() -> ConvGeom {
        ConvGeom {
            in_c: 2,
            out_c: 3,
            kh: 3,
            kw: 2,
            stride: 2,
            pad_h: 1,
            pad_w: 1,
            in_h: 5,
            in_w: 6,
        }
    }

    fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn conv_matches_nested_loops() {
        let g = geom();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Tensor4::from_vec(2, 2, 5, 6, random(&mut rng, 120)).unwrap();
        let w = random(&mut rng, g.weight_len());
        let b = random(&mut rng, 3);
        let y = conv_forward(&g, &w, &b, &x);
        assert_eq!(y.shape(), (2, 3, 3, 4));
        for (a, e) in y.data().iter().zip(naive_conv(&g, &w, &b, &x)) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        let g = geom();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random(&mut rng, 60);
        let k = g.patch_len() * g.out_h() * g.out_w();
        let c = random(&mut rng, k);
        let mut cols = vec![0.0; k];
        im2col(&g, &x, &mut cols);
        let mut back = vec![0.0; 60];
        col2im(&g, &c, &mut back);
        let lhs: f64 = cols.iter().zip(&c).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn prelu_hand_values() {
        let x = Tensor4::from_vec(1, 2, 1, 2, vec![-2.0, 3.0, -1.0, 0.5]).unwrap();
        let y = prelu_forward(&[0.25, 0.5], &x);
        assert_eq!(y.data(), &[-0.5, 3.0, -0.5, 0.5]);
    }

    #[test]
    fn dropout_mask_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = dropout_mask(&mut rng, 0.5, 1000);
        assert!(m.iter().all(|&v| v == 0.0 || v == 2.0));
        let kept = m.iter().filter(|&&v| v > 0.0).count();
        assert!((400..600).contains(&kept));
    }
}
