//! Binary checkpoint format.
//!
//! ```text
//! "CGDN" | u32 version = 1 | u32 entry count
//! per entry: u16 name length | UTF-8 name | u8 dtype | u8 ndim | ndim × u32 dims | payload
//! ```
//!
//! All integers and payloads are little-endian. dtype 0 is f32; dtype 1 is raw
//! bytes, used for the model configuration stored under [`CONFIG_ENTRY`].

use std::path::Path;

use crate::error::{Error, Result};
use crate::params::ParamStore;
use crate::tensor::Tensor4;

pub const MAGIC: &[u8; 4] = b"CGDN";
pub const VERSION: u32 = 1;
pub const CONFIG_ENTRY: &str = "__config__";

const DTYPE_F32: u8 = 0;
const DTYPE_BYTES: u8 = 1;

/// Decoded checkpoint contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_json: Option<String>,
    pub tensors: Vec<(String, Tensor4<f32>)>,
}

impl Checkpoint {
    pub fn from_store(store: &ParamStore<f32>, config_json: Option<String>) -> Self {
        let tensors = store.iter().map(|(name, p)| (name.to_owned(), p.value.clone())).collect();
        Self { config_json, tensors }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        let count = self.tensors.len() + usize::from(self.config_json.is_some());
        out.extend_from_slice(&u32::try_from(count).map_err(|_| Error::Checkpoint("too many entries".into()))?.to_le_bytes());
        if let Some(cfg) = &self.config_json {
            write_header(&mut out, CONFIG_ENTRY, DTYPE_BYTES, &[cfg.len()])?;
            out.extend_from_slice(cfg.as_bytes());
        }
        for (name, t) in &self.tensors {
            if name == CONFIG_ENTRY {
                return Err(Error::Checkpoint(format!("`{CONFIG_ENTRY}` is a reserved name")));
            }
            write_header(&mut out, name, DTYPE_F32, &t.dims().as_array())?;
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let count = r.u32()?;
        let mut config_json = None;
        let mut tensors = Vec::new();
        for _ in 0..count {
            let name_len = r.u16()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| Error::Checkpoint("entry name is not UTF-8".into()))?
                .to_owned();
            let dtype = r.u8()?;
            let ndim = r.u8()? as usize;
            let dims: Vec<usize> = (0..ndim).map(|_| r.u32().map(|d| d as usize)).collect::<Result<_>>()?;
            let numel: usize = dims.iter().product();
            match dtype {
                DTYPE_BYTES => {
                    let raw = r.take(numel)?;
                    let text = String::from_utf8(raw.to_vec())
                        .map_err(|_| Error::Checkpoint(format!("`{name}` is not UTF-8")))?;
                    if name != CONFIG_ENTRY || config_json.replace(text).is_some() {
                        return Err(Error::Checkpoint(format!("unexpected byte entry `{name}`")));
                    }
                }
                DTYPE_F32 => {
                    if ndim > 4 {
                        return Err(Error::Checkpoint(format!("`{name}` has {ndim} dims")));
                    }
                    let mut d4 = [1usize; 4];
                    d4[4 - ndim..].copy_from_slice(&dims);
                    let raw = r.take(numel * 4)?;
                    let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
                    tensors.push((name, Tensor4::from_vec(d4, data)?));
                }
                other => return Err(Error::Checkpoint(format!("`{name}` has unknown dtype {other}"))),
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Self { config_json, tensors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }
}

fn write_header(out: &mut Vec<u8>, name: &str, dtype: u8, dims: &[usize]) -> Result<()> {
    let len = u16::try_from(name.len()).map_err(|_| Error::Checkpoint(format!("name too long: {name}")))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    out.push(dtype);
    out.push(dims.len() as u8);
    for &d in dims {
        let d = u32::try_from(d).map_err(|_| Error::Checkpoint(format!("`{name}` dim {d} too large")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamKind;

    #[test]
    fn header_layout_is_exact() {
        let ck = Checkpoint {
            config_json: None,
            tensors: vec![("b".into(), Tensor4::from_vec([1, 1, 1, 2], vec![1.0, -2.0]).unwrap())],
        };
        let bytes = ck.encode().unwrap();
        let mut want = b"CGDN".to_vec();
        want.extend([1, 0, 0, 0, 1, 0, 0, 0]);
        want.extend([1, 0, b'b', 0, 4]);
        want.extend([1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0]);
        want.extend(1.0f32.to_le_bytes());
        want.extend((-2.0f32).to_le_bytes());
        assert_eq!(bytes, want);
    }

    #[test]
    fn store_round_trip_is_byte_identical() {
        let mut s = ParamStore::<f32>::new();
        s.insert("conv.w", ParamKind::ConvWeight, Tensor4::from_fn([2, 1, 3, 3], |a, _, c, d| (a + c * 3 + d) as f32 * 0.1)).unwrap();
        s.insert("bn.var", ParamKind::BnRunningVar, Tensor4::full([2, 1, 1, 1], 1.5)).unwrap();
        let ck = Checkpoint::from_store(&s, Some("{\"crop\":32}".into()));
        let bytes = ck.encode().unwrap();
        let back = Checkpoint::decode(&bytes).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.encode().unwrap(), bytes);
    }

    #[test]
    fn rejects_corruption() {
        let ck = Checkpoint { config_json: Some("{}".into()), tensors: vec![] };
        let mut bytes = ck.encode().unwrap();
        assert!(Checkpoint::decode(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(Checkpoint::decode(&bytes).is_err());
    }
}
