//! Grid binary format ("BLB1") and CSV export.
//!
//! Layout, little-endian: magic `BLB1`, u32 nx, u32 np, f64 dx, f64 dp, f64 x0, f64 hbar,
//! u8 complex flag, u16 label length, label bytes, then nx·np samples (re or re,im).

use std::io::{Read, Write};

use num_complex::Complex64;

use super::grid::PhaseSpaceFunction;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"BLB1";

#[derive(Clone, Debug, PartialEq)]
pub struct GridRecord {
    pub nx: usize,
    pub np: usize,
    pub dx: f64,
    pub dp: f64,
    pub x0: f64,
    pub hbar: f64,
    pub complex: bool,
    pub label: String,
    pub data: Vec<Complex64>,
}

impl GridRecord {
    pub fn from_phase_space(f: &PhaseSpaceFunction, hbar: f64, label: &str) -> Self {
        Self {
            nx: f.nx,
            np: f.np,
            dx: f.dx,
            dp: f.dp,
            x0: f.x0,
            hbar,
            complex: f.max_imag() > 0.0,
            label: label.to_string(),
            data: f.data.clone(),
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.nx as u32).to_le_bytes())?;
        w.write_all(&(self.np as u32).to_le_bytes())?;
        for v in [self.dx, self.dp, self.x0, self.hbar] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&[u8::from(self.complex)])?;
        let label = self.label.as_bytes();
        let len = u16::try_from(label.len()).map_err(|_| Error::InvalidInput("label too long".into()))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(label)?;
        for v in &self.data {
            w.write_all(&v.re.to_le_bytes())?;
            if self.complex {
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("bad magic, expected BLB1".into()));
        }
        let nx = read_u32(&mut r)? as usize;
        let np = read_u32(&mut r)? as usize;
        let dx = read_f64(&mut r)?;
        let dp = read_f64(&mut r)?;
        let x0 = read_f64(&mut r)?;
        let hbar = read_f64(&mut r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let complex = match flag[0] {
            0 => false,
            1 => true,
            other => return Err(Error::Parse(format!("bad complex flag {other}"))),
        };
        let mut len = [0u8; 2];
        r.read_exact(&mut len)?;
        let mut label = vec![0u8; u16::from_le_bytes(len) as usize];
        r.read_exact(&mut label)?;
        let label = String::from_utf8(label).map_err(|e| Error::Parse(e.to_string()))?;
        let mut data = Vec::with_capacity(nx * np);
        for _ in 0..nx * np {
            let re = read_f64(&mut r)?;
            let im = if complex { read_f64(&mut r)? } else { 0.0 };
            data.push(Complex64::new(re, im));
        }
        Ok(Self { nx, np, dx, dp, x0, hbar, complex, label, data })
    }

    pub fn p0(&self) -> f64 {
        -((self.np / 2) as f64) * self.dp
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Plot-ready CSV with columns x, p, re, im.
pub fn write_csv(f: &PhaseSpaceFunction, mut w: impl Write) -> Result<()> {
    writeln!(w, "x,p,re,im")?;
    for i in 0..f.nx {
        for k in 0..f.np {
            let v = f.get(i, k);
            writeln!(w, "{},{},{},{}", f.x(i), f.p(k), v.re, v.im)?;
        }
    }
    Ok(())
}
