//! Frame encodings for the binary channel.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! "IMLG"  version:u16  frameId:u64
//! nodeCount:u32  { id:u32  pos:3×f32  radius:f32  rgba:4×u8 }*
//! edgeCount:u32  { id:u32  pointCount:u16  rgba:4×u8  width:f32  points:pointCount×3×f32 }*
//! ringCount:u32  { kind:u8  id:u32  center:3×f32  radius:f32  rgba:4×u8 }*
//! ```

use glam::Vec3;
use multilayout_core::scene::{EdgePolyline, LayoutFrame, NodeInstance, Ring, RingKind};
use multilayout_core::{EdgeId, NodeId, Rgba};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"IMLG";
pub const VERSION: u16 = 1;
/// Bytes before the first node record.
pub const HEADER_LEN: usize = 4 + 2 + 8 + 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    Version(u16),
    #[error("truncated at byte {0}")]
    Truncated(usize),
    #[error("unknown ring kind {0}")]
    RingKind(u8),
    #[error("{0} trailing bytes")]
    Trailing(usize),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, x: u8) {
        self.0.push(x);
    }
    fn u16(&mut self, x: u16) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn f32(&mut self, x: f32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn vec3(&mut self, v: Vec3) {
        self.f32(v.x);
        self.f32(v.y);
        self.f32(v.z);
    }
    fn rgba(&mut self, c: Rgba) {
        self.0.extend_from_slice(&c.0);
    }
}

/// Encodes a frame. Polylines longer than `u16::MAX` points are truncated;
/// valid frames never have them.
pub fn encode_binary(f: &LayoutFrame) -> Vec<u8> {
    let points: usize = f.edges.iter().map(|e| e.points.len()).sum();
    let mut w = Writer(Vec::with_capacity(
        HEADER_LEN + 8 + f.nodes.len() * 24 + f.edges.len() * 14 + points * 12 + f.rings.len() * 25,
    ));
    w.0.extend_from_slice(MAGIC);
    w.u16(VERSION);
    w.u64(f.frame_id);
    w.u32(f.nodes.len() as u32);
    for n in &f.nodes {
        w.u32(n.id.0);
        w.vec3(n.position);
        w.f32(n.radius);
        w.rgba(n.color);
    }
    w.u32(f.edges.len() as u32);
    for e in &f.edges {
        let count = e.points.len().min(u16::MAX as usize);
        w.u32(e.id.0);
        w.u16(count as u16);
        w.rgba(e.color);
        w.f32(e.width);
        for &p in &e.points[..count] {
            w.vec3(p);
        }
    }
    w.u32(f.rings.len() as u32);
    for r in &f.rings {
        w.u8(r.kind as u8);
        w.u32(r.id);
        w.vec3(r.center);
        w.f32(r.radius);
        w.rgba(r.color);
    }
    w.0
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let end = self.at + N;
        let bytes = self
            .buf
            .get(self.at..end)
            .ok_or(DecodeError::Truncated(self.buf.len()))?;
        self.at = end;
        Ok(bytes.try_into().expect("slice has length N"))
    }
    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16, DecodeError> {
        self.take().map(u16::from_le_bytes)
    }
    fn u32(&mut self) -> Result<u32, DecodeError> {
        self.take().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> Result<u64, DecodeError> {
        self.take().map(u64::from_le_bytes)
    }
    fn f32(&mut self) -> Result<f32, DecodeError> {
        self.take().map(f32::from_le_bytes)
    }
    fn vec3(&mut self) -> Result<Vec3, DecodeError> {
        Ok(Vec3::new(self.f32()?, self.f32()?, self.f32()?))
    }
    fn rgba(&mut self) -> Result<Rgba, DecodeError> {
        self.take().map(Rgba)
    }
    /// Capacity hint that cannot be inflated by a hostile count.
    fn room(&self, count: u32, record: usize) -> usize {
        (count as usize).min((self.buf.len() - self.at) / record)
    }
}

pub fn decode_binary(buf: &[u8]) -> Result<LayoutFrame, DecodeError> {
    let mut r = Reader { buf, at: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(DecodeError::Version(version));
    }
    let frame_id = r.u64()?;

    let count = r.u32()?;
    let mut nodes = Vec::with_capacity(r.room(count, 24));
    for _ in 0..count {
        nodes.push(NodeInstance {
            id: NodeId(r.u32()?),
            position: r.vec3()?,
            radius: r.f32()?,
            color: r.rgba()?,
        });
    }

    let count = r.u32()?;
    let mut edges = Vec::with_capacity(r.room(count, 14));
    for _ in 0..count {
        let id = EdgeId(r.u32()?);
        let n = r.u16()?;
        let color = r.rgba()?;
        let width = r.f32()?;
        let mut points = Vec::with_capacity(r.room(n as u32, 12));
        for _ in 0..n {
            points.push(r.vec3()?);
        }
        edges.push(EdgePolyline {
            id,
            points,
            color,
            width,
        });
    }

    let count = r.u32()?;
    let mut rings = Vec::with_capacity(r.room(count, 25));
    for _ in 0..count {
        let kind = r.u8()?;
        rings.push(Ring {
            kind: RingKind::from_u8(kind).ok_or(DecodeError::RingKind(kind))?,
            id: r.u32()?,
            center: r.vec3()?,
            radius: r.f32()?,
            color: r.rgba()?,
        });
    }
    if r.at != buf.len() {
        return Err(DecodeError::Trailing(buf.len() - r.at));
    }
    Ok(LayoutFrame {
        frame_id,
        nodes,
        edges,
        rings,
    })
}

pub fn encode_json(f: &LayoutFrame) -> String {
    f.to_canonical_json()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_frame_is_header_only() {
        let bytes = encode_binary(&LayoutFrame::default());
        assert_eq!(bytes.len(), HEADER_LEN + 4 + 4);
        assert_eq!(&bytes[..4], b"IMLG");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert!(bytes[6..].iter().all(|&b| b == 0));
        assert_eq!(decode_binary(&bytes).unwrap(), LayoutFrame::default());
    }

    #[test]
    fn node_at_origin() {
        let f = LayoutFrame {
            frame_id: 3,
            nodes: vec![NodeInstance {
                id: NodeId(5),
                position: Vec3::ZERO,
                radius: 0.5,
                color: Rgba([1, 2, 3, 4]),
            }],
            ..Default::default()
        };
        let bytes = encode_binary(&f);
        let rec = &bytes[HEADER_LEN..HEADER_LEN + 24];
        assert_eq!(&rec[..4], &5u32.to_le_bytes());
        assert!(rec[4..16].iter().all(|&b| b == 0));
        assert_eq!(&rec[16..20], &0.5f32.to_le_bytes());
        assert_eq!(&rec[20..], &[1, 2, 3, 4]);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let mut bytes = encode_binary(&LayoutFrame::default());
        assert_eq!(decode_binary(&bytes[..10]), Err(DecodeError::Truncated(10)));
        bytes.push(0);
        assert_eq!(decode_binary(&bytes), Err(DecodeError::Trailing(1)));
        bytes[0] = b'X';
        assert_eq!(decode_binary(&bytes), Err(DecodeError::BadMagic));
    }

    #[test]
    fn huge_counts_do_not_allocate() {
        let mut bytes = encode_binary(&LayoutFrame::default());
        bytes[HEADER_LEN - 4..HEADER_LEN].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(decode_binary(&bytes), Err(DecodeError::Truncated(_))));
    }
}
