use crate::error::{Error, Result};

/// Dense NCHW tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    c: usize,
    h: usize,
    w: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize, c: usize, h: usize, w: usize) -> Result<Self> {
        Self::check_dims(n, c, h, w)?;
        Ok(Self {
            n,
            c,
            h,
            w,
            data: vec![0.0; n * c * h * w],
        })
    }

    pub fn from_vec(n: usize, c: usize, h: usize, w: usize, data: Vec<f64>) -> Result<Self> {
        Self::check_dims(n, c, h, w)?;
        if data.len() != n * c * h * w {
            return Err(Error::dims(n * c * h * w, data.len()));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tensor values"));
        }
        Ok(Self { n, c, h, w, data })
    }

    fn check_dims(n: usize, c: usize, h: usize, w: usize) -> Result<()> {
        if n == 0 || c == 0 || h == 0 || w == 0 {
            return Err(Error::dims("all tensor dims >= 1", format!("{n}x{c}x{h}x{w}")));
        }
        Ok(())
    }

    /// Stacks normalized single-image buffers of `c*h*w` values each.
    pub fn stack(images: &[&[f32]], c: usize, h: usize, w: usize) -> Result<Self> {
        let per = c * h * w;
        let mut data = Vec::with_capacity(images.len() * per);
        for img in images {
            if img.len() != per {
                return Err(Error::dims(per, img.len()));
            }
            data.extend(img.iter().map(|&v| v as f64));
        }
        Self::from_vec(images.len(), c, h, w, data)
    }

    pub(crate) fn from_raw(n: usize, c: usize, h: usize, w: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * c * h * w);
        Self { n, c, h, w, data }
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.n, self.c, self.h, self.w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn sample_len(&self) -> usize {
        self.c * self.h * self.w
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let s = self.sample_len();
        &self.data[i * s..(i + 1) * s]
    }

    pub fn sample_mut(&mut self, i: usize) -> &mut [f64] {
        let s = self.sample_len();
        &mut self.data[i * s..(i + 1) * s]
    }

    pub fn at(&self, n: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[((n * self.c + c) * self.h + y) * self.w + x]
    }

    /// Concatenates along channels: `[a, b]` per sample.
    pub fn concat_channels(a: &Tensor4, b: &Tensor4) -> Result<Tensor4> {
        if a.n != b.n || a.h != b.h || a.w != b.w {
            return Err(Error::dims(
                format!("{}x*x{}x{}", a.n, a.h, a.w),
                format!("{}x*x{}x{}", b.n, b.h, b.w),
            ));
        }
        let mut data = Vec::with_capacity(a.data.len() + b.data.len());
        for i in 0..a.n {
            data.extend_from_slice(a.sample(i));
            data.extend_from_slice(b.sample(i));
        }
        Ok(Self::from_raw(a.n, a.c + b.c, a.h, a.w, data))
    }

    /// Inverse of [`Tensor4::concat_channels`]: splits off the first `c` channels.
    pub fn split_channels(&self, c: usize) -> (Tensor4, Tensor4) {
        assert!(c > 0 && c < self.c);
        let plane = self.h * self.w;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..self.n {
            let s = self.sample(i);
            a.extend_from_slice(&s[..c * plane]);
            b.extend_from_slice(&s[c * plane..]);
        }
        (
            Self::from_raw(self.n, c, self.h, self.w, a),
            Self::from_raw(self.n, self.c - c, self.h, self.w, b),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dims_and_values() {
        assert!(Tensor4::zeros(0, 1, 1, 1).is_err());
        assert!(Tensor4::from_vec(1, 1, 1, 2, vec![0.0]).is_err());
        assert!(matches!(
            Tensor4::from_vec(1, 1, 1, 1, vec![f64::NAN]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn concat_then_split_roundtrips() {
        let a = Tensor4::from_vec(2, 1, 1, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor4::from_vec(2, 2, 1, 2, (0..8).map(f64::from).collect()).unwrap();
        let c = Tensor4::concat_channels(&a, &b).unwrap();
        assert_eq!(c.shape(), (2, 3, 1, 2));
        assert_eq!(c.sample(1), &[3.0, 4.0, 4.0, 5.0, 6.0, 7.0]);
        let (x, y) = c.split_channels(1);
        assert_eq!((x, y), (a, b));
    }
}
