//! The HMF1 field container.
//!
//! ```text
//! b"HMF1"
//! u32 n, f64 h, u32 field_count
//! per field: u16 name_len, name (UTF-8), u8 rank (0 or 1), payload
//! ```
//!
//! Everything is little-endian. Payloads are `f64` in x-fastest site order
//! with the three Lie coefficients innermost; rank 1 stores the three
//! components of each site before moving to the next site.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use haydys_core::bps::Configuration;
use haydys_core::{Field0, Field1, Grid, LieValue, Pair};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"HMF1";

#[derive(Debug, Error)]
pub enum Hmf1Error {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("bad grid: {0}")]
    Grid(haydys_core::Error),
    #[error("field {name:?} has rank {rank}, expected 0 or 1")]
    BadRank { name: String, rank: u8 },
    #[error("field name is not UTF-8")]
    BadName,
    #[error("duplicate field {0:?}")]
    Duplicate(String),
    #[error("missing field {0:?}")]
    Missing(&'static str),
    #[error("field {name:?} has rank {found}, expected {expected}")]
    WrongRank { name: String, expected: u8, found: u8 },
    #[error("{0} trailing bytes after the last field")]
    Trailing(usize),
    #[error("non-finite value in field {0:?}")]
    NonFinite(String),
}

/// A field payload.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Rank0(Field0),
    Rank1(Field1),
}

impl FieldData {
    pub fn rank(&self) -> u8 {
        match self {
            FieldData::Rank0(_) => 0,
            FieldData::Rank1(_) => 1,
        }
    }
}

/// An in-memory HMF1 file.
#[derive(Clone, Debug, PartialEq)]
pub struct Hmf1 {
    pub grid: Grid,
    pub fields: Vec<(String, FieldData)>,
}

impl Hmf1 {
    pub fn new(grid: &Grid) -> Hmf1 {
        Hmf1 { grid: grid.clone(), fields: Vec::new() }
    }

    pub fn push(&mut self, name: &str, data: FieldData) -> &mut Hmf1 {
        self.fields.push((name.to_owned(), data));
        self
    }

    pub fn get(&self, name: &str) -> Option<&FieldData> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    fn field0(&self, name: &'static str) -> Result<Option<Field0>, Hmf1Error> {
        match self.get(name) {
            None => Ok(None),
            Some(FieldData::Rank0(f)) => Ok(Some(f.clone())),
            Some(d) => Err(Hmf1Error::WrongRank { name: name.into(), expected: 0, found: d.rank() }),
        }
    }

    fn field1(&self, name: &'static str) -> Result<Option<Field1>, Hmf1Error> {
        match self.get(name) {
            None => Ok(None),
            Some(FieldData::Rank1(f)) => Ok(Some(f.clone())),
            Some(d) => Err(Hmf1Error::WrongRank { name: name.into(), expected: 1, found: d.rank() }),
        }
    }

    /// Fields `nabla`, `phi`, `a`, `psi`.
    pub fn from_configuration(c: &Configuration) -> Hmf1 {
        let mut f = Hmf1::new(c.grid());
        f.push("nabla", FieldData::Rank1(c.nabla.clone()))
            .push("phi", FieldData::Rank0(c.phi.clone()))
            .push("a", FieldData::Rank1(c.a.clone()))
            .push("psi", FieldData::Rank0(c.psi.clone()));
        f
    }

    /// Requires `nabla` and `phi`; a missing `a` or `psi` reads as zero.
    pub fn to_configuration(&self) -> Result<Configuration, Hmf1Error> {
        let nabla = self.field1("nabla")?.ok_or(Hmf1Error::Missing("nabla"))?;
        let phi = self.field0("phi")?.ok_or(Hmf1Error::Missing("phi"))?;
        let a = self.field1("a")?.unwrap_or_else(|| Field1::zeros(&self.grid));
        let psi = self.field0("psi")?.unwrap_or_else(|| Field0::zeros(&self.grid));
        Configuration::new(nabla, phi, a, psi).map_err(Hmf1Error::Grid)
    }

    /// A tangent vector `(a, Ψ)` as fields `a`, `psi`.
    pub fn from_pair(v: &Pair) -> Hmf1 {
        let mut f = Hmf1::new(v.grid());
        f.push("a", FieldData::Rank1(v.one.clone())).push("psi", FieldData::Rank0(v.zero.clone()));
        f
    }

    pub fn to_pair(&self) -> Result<Pair, Hmf1Error> {
        let one = self.field1("a")?.ok_or(Hmf1Error::Missing("a"))?;
        let zero = self.field0("psi")?.ok_or(Hmf1Error::Missing("psi"))?;
        Pair::new(one, zero).map_err(Hmf1Error::Grid)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), Hmf1Error> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(self.grid.n() as u32)?;
        w.write_f64::<LittleEndian>(self.grid.h())?;
        w.write_u32::<LittleEndian>(self.fields.len() as u32)?;
        let lie = |w: &mut W, v: &LieValue| -> io::Result<()> {
            for x in v.0 {
                w.write_f64::<LittleEndian>(x)?;
            }
            Ok(())
        };
        for (name, data) in &self.fields {
            w.write_u16::<LittleEndian>(name.len() as u16)?;
            w.write_all(name.as_bytes())?;
            w.write_u8(data.rank())?;
            match data {
                FieldData::Rank0(f) => {
                    for v in &f.data {
                        lie(&mut w, v)?;
                    }
                }
                FieldData::Rank1(f) => {
                    for v in f.data.iter().flatten() {
                        lie(&mut w, v)?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Hmf1, Hmf1Error> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Hmf1Error::BadMagic(magic));
        }
        let n = r.read_u32::<LittleEndian>()? as usize;
        let h = r.read_f64::<LittleEndian>()?;
        let grid = Grid::new(n, h).map_err(Hmf1Error::Grid)?;
        let count = r.read_u32::<LittleEndian>()?;
        let mut out = Hmf1::new(&grid);
        let lie = |r: &mut R| -> io::Result<LieValue> {
            Ok(LieValue::new(r.read_f64::<LittleEndian>()?, r.read_f64::<LittleEndian>()?, r.read_f64::<LittleEndian>()?))
        };
        for _ in 0..count {
            let len = r.read_u16::<LittleEndian>()? as usize;
            let mut name = vec![0u8; len];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name).map_err(|_| Hmf1Error::BadName)?;
            if out.get(&name).is_some() {
                return Err(Hmf1Error::Duplicate(name));
            }
            let data = match r.read_u8()? {
                0 => {
                    let mut f = Field0::zeros(&grid);
                    for v in f.data.iter_mut() {
                        *v = lie(&mut r)?;
                    }
                    if !f.is_finite() {
                        return Err(Hmf1Error::NonFinite(name));
                    }
                    FieldData::Rank0(f)
                }
                1 => {
                    let mut f = Field1::zeros(&grid);
                    for v in f.data.iter_mut().flatten() {
                        *v = lie(&mut r)?;
                    }
                    if !f.is_finite() {
                        return Err(Hmf1Error::NonFinite(name));
                    }
                    FieldData::Rank1(f)
                }
                rank => return Err(Hmf1Error::BadRank { name, rank }),
            };
            out.fields.push((name, data));
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Hmf1Error::Trailing(rest.len()));
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<(), Hmf1Error> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Hmf1, Hmf1Error> {
        Hmf1::read_from(BufReader::new(File::open(path)?))
    }
}
