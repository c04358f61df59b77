//! Binary masks and the morphology used to clean them up.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Structuring element given as centered pixel offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    offsets: Vec<(i32, i32)>,
}

impl Kernel {
    /// Discrete ellipse inscribed in a `k` by `k` box, `k` odd: offset
    /// `(i, j)` belongs iff `(i/a)^2 + (j/a)^2 <= 1` with `a = (k-1)/2`.
    /// `k = 3` gives the plus-shaped cross, `k = 1` the identity.
    pub fn ellipse(k: u32) -> Result<Self> {
        if k == 0 || k % 2 == 0 {
            return Err(Error::InvalidConfig("elliptical kernel size must be odd"));
        }
        let a = (k as i32 - 1) / 2;
        if a == 0 {
            return Ok(Self { offsets: vec![(0, 0)] });
        }
        let mut offsets = Vec::new();
        for j in -a..=a {
            for i in -a..=a {
                if i * i + j * j <= a * a {
                    offsets.push((i, j));
                }
            }
        }
        Ok(Self { offsets })
    }

    /// Euclidean disk of the given radius: offsets with
    /// `dx^2 + dy^2 <= radius^2`. Radius 0 is the identity.
    pub fn disk(radius: u32) -> Self {
        let r = radius as i64;
        let mut offsets = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    offsets.push((dx as i32, dy as i32));
                }
            }
        }
        Self { offsets }
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }
}

/// Row-major boolean image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, bits: vec![false; width as usize * height as usize] }
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        Self { width, height, bits: vec![value; width as usize * height as usize] }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: bits.len() });
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    /// Value at a signed coordinate; out-of-frame reads return `pad`.
    #[inline]
    fn get_padded(&self, x: i64, y: i64, pad: bool) -> bool {
        if x < 0 || y < 0 || x >= i64::from(self.width) || y >= i64::from(self.height) {
            pad
        } else {
            self.bits[y as usize * self.width as usize + x as usize]
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Foreground fraction of the frame.
    pub fn area_ratio(&self) -> f64 {
        if self.bits.is_empty() { 0.0 } else { self.count_ones() as f64 / self.bits.len() as f64 }
    }

    pub fn check_same_shape(&self, other: &BinaryMask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::ShapeMismatch {
                expected_width: self.width,
                expected_height: self.height,
                actual_width: other.width,
                actual_height: other.height,
            });
        }
        Ok(())
    }

    pub fn intersect(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.check_same_shape(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect();
        Ok(BinaryMask { width: self.width, height: self.height, bits })
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.check_same_shape(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a || b).collect();
        Ok(BinaryMask { width: self.width, height: self.height, bits })
    }

    pub fn complement(&self) -> BinaryMask {
        let bits = self.bits.iter().map(|&b| !b).collect();
        BinaryMask { width: self.width, height: self.height, bits }
    }

    /// Morphological erosion. Neighborhoods reaching outside the frame
    /// read foreground there, so a full mask stays full.
    pub fn erode(&self, kernel: &Kernel) -> BinaryMask {
        self.morph(kernel, true)
    }

    /// Morphological dilation. Out-of-frame reads are background.
    pub fn dilate(&self, kernel: &Kernel) -> BinaryMask {
        self.morph(kernel, false)
    }

    fn morph(&self, kernel: &Kernel, erode: bool) -> BinaryMask {
        let mut out = BinaryMask::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let mut acc = erode;
                for &(dx, dy) in kernel.offsets() {
                    let v = self.get_padded(i64::from(x) + i64::from(dx), i64::from(y) + i64::from(dy), erode);
                    if erode {
                        acc &= v;
                    } else {
                        acc |= v;
                    }
                    if acc != erode {
                        break;
                    }
                }
                out.set(x, y, acc);
            }
        }
        out
    }

    /// Erosion followed by dilation with the same kernel.
    pub fn open(&self, kernel: &Kernel) -> BinaryMask {
        self.erode(kernel).dilate(kernel)
    }

    /// Dilation followed by erosion with the same kernel.
    pub fn close(&self, kernel: &Kernel) -> BinaryMask {
        self.dilate(kernel).erode(kernel)
    }

    /// Removes 8-connected foreground components with fewer than
    /// `min_area` pixels.
    pub fn remove_small_components(&self, min_area: usize) -> BinaryMask {
        let width = self.width as i64;
        let height = self.height as i64;
        let mut out = self.clone();
        let mut seen = vec![false; self.bits.len()];
        let mut component = Vec::new();
        let mut stack = Vec::new();

        for start in 0..self.bits.len() {
            if !self.bits[start] || seen[start] {
                continue;
            }
            component.clear();
            stack.push(start);
            seen[start] = true;
            while let Some(idx) = stack.pop() {
                component.push(idx);
                let x = (idx % self.width as usize) as i64;
                let y = (idx / self.width as usize) as i64;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= width || ny >= height {
                            continue;
                        }
                        let nidx = ny as usize * self.width as usize + nx as usize;
                        if self.bits[nidx] && !seen[nidx] {
                            seen[nidx] = true;
                            stack.push(nidx);
                        }
                    }
                }
            }
            if component.len() < min_area {
                for &idx in &component {
                    out.bits[idx] = false;
                }
            }
        }
        out
    }
}
