use nalgebra::{Isometry3, Quaternion, Translation3, UnitQuaternion};

use super::{Drm, Grid};
use crate::{Configuration, Error, Result};

pub const DRM_MAGIC: &[u8; 4] = b"DRM1";
pub const DRM_VERSION: u32 = 1;
const POSE_LEN: usize = 7;
const MAX_DOF: u32 = 64;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_csr(out: &mut Vec<u8>, lists: &[Vec<u32>]) {
    let mut offset = 0u64;
    put_u64(out, 0);
    for l in lists {
        offset += l.len() as u64;
        put_u64(out, offset);
    }
    for l in lists {
        for &id in l {
            put_u32(out, id);
        }
    }
}

/// Little-endian binary encoding of a roadmap.
///
/// Layout: magic, version, dof, node count, voxel count, grid (origin,
/// side, extents), node configurations, adjacency as CSR (u64 offsets,
/// u32 ids), the voxel lookup as CSR, and one pose per node as translation
/// followed by the quaternion `(x, y, z, w)`.
pub fn encode_drm(drm: &Drm) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(DRM_MAGIC);
    put_u32(&mut out, DRM_VERSION);
    put_u32(&mut out, drm.dof as u32);
    put_u64(&mut out, drm.nodes.len() as u64);
    put_u64(&mut out, drm.grid.len() as u64);
    for v in drm.grid.origin {
        put_f64(&mut out, v);
    }
    put_f64(&mut out, drm.grid.side);
    for e in drm.grid.extents {
        put_u32(&mut out, e);
    }
    for q in &drm.nodes {
        for &v in q.iter() {
            put_f64(&mut out, v);
        }
    }
    put_csr(&mut out, &drm.adjacency);
    put_csr(&mut out, &drm.collision_map);
    for p in &drm.poses {
        let t = p.translation.vector;
        let r = p.rotation.coords;
        for v in [t.x, t.y, t.z, r.x, r.y, r.z, r.w] {
            put_f64(&mut out, v);
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Parse(format!("roadmap file truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    /// Fails unless `count` items of `size` bytes fit in the rest of the input.
    fn expect(&self, count: u64, size: usize, what: &str) -> Result<usize> {
        let total = usize::try_from(count).ok().and_then(|c| c.checked_mul(size));
        match total {
            Some(t) if t <= self.remaining() => Ok(count as usize),
            _ => Err(Error::Parse(format!("roadmap file too short for {count} {what}"))),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        let v = f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Parse(format!("non-finite value before byte {}", self.pos)))
        }
    }

    fn csr(&mut self, rows: usize, id_bound: usize, what: &str) -> Result<Vec<Vec<u32>>> {
        let rows1 = self.expect(rows as u64 + 1, 8, what)?;
        let mut offsets = Vec::with_capacity(rows1);
        for _ in 0..rows1 {
            offsets.push(self.u64()?);
        }
        if offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parse(format!("{what} offsets are not monotone from zero")));
        }
        let total = self.expect(offsets[rows], 4, what)?;
        let mut ids = Vec::with_capacity(total);
        for _ in 0..total {
            let id = self.u32()?;
            if id as usize >= id_bound {
                return Err(Error::Parse(format!("{what} references node {id} of {id_bound}")));
            }
            ids.push(id);
        }
        let lists: Vec<Vec<u32>> = offsets.windows(2).map(|w| ids[w[0] as usize..w[1] as usize].to_vec()).collect();
        if lists.iter().any(|l| l.windows(2).any(|w| w[0] >= w[1])) {
            return Err(Error::Parse(format!("{what} lists must be strictly increasing")));
        }
        Ok(lists)
    }
}

/// Decodes [`encode_drm`] output, validating every size before allocating.
pub fn decode_drm(bytes: &[u8]) -> Result<Drm> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != DRM_MAGIC {
        return Err(Error::Parse("not a roadmap file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != DRM_VERSION {
        return Err(Error::Parse(format!("unsupported roadmap version {version}")));
    }
    let dof = r.u32()?;
    if dof == 0 || dof > MAX_DOF {
        return Err(Error::Parse(format!("roadmap dof {dof} out of range")));
    }
    let dof = dof as usize;
    let n_nodes = r.u64()?;
    let n_voxels = r.u64()?;
    let origin = [r.f64()?, r.f64()?, r.f64()?];
    let side = r.f64()?;
    let extents = [r.u32()?, r.u32()?, r.u32()?];
    let grid = Grid::new(origin, side, extents).map_err(|e| Error::Parse(e.to_string()))?;
    let cells = extents.iter().try_fold(1u64, |acc, &e| acc.checked_mul(e as u64));
    if cells != Some(n_voxels) {
        return Err(Error::Parse(format!("voxel count {n_voxels} does not match grid extents {extents:?}")));
    }
    if n_nodes > u32::MAX as u64 {
        return Err(Error::Parse(format!("node count {n_nodes} too large")));
    }
    // Offsets alone need 8 bytes per voxel, so this bounds the allocation.
    let n_voxels = r.expect(n_voxels, 8, "voxels")?;
    let n = r.expect(n_nodes, dof * 8, "nodes")?;

    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let mut q = Vec::with_capacity(dof);
        for _ in 0..dof {
            q.push(r.f64()?);
        }
        nodes.push(Configuration::from_vec(q));
    }
    let adjacency = r.csr(n, n, "adjacency")?;
    for (i, nbrs) in adjacency.iter().enumerate() {
        for &j in nbrs {
            if j as usize == i || adjacency[j as usize].binary_search(&(i as u32)).is_err() {
                return Err(Error::Parse(format!("adjacency edge {i}-{j} is a self loop or not symmetric")));
            }
        }
    }
    let collision_map = r.csr(n_voxels, n, "collision map")?;
    r.expect(n as u64, POSE_LEN * 8, "poses")?;
    let mut poses = Vec::with_capacity(n);
    for _ in 0..n {
        let t = Translation3::new(r.f64()?, r.f64()?, r.f64()?);
        let (x, y, z, w) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
        let q = Quaternion::new(w, x, y, z);
        if (q.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Parse("pose rotation is not a unit quaternion".into()));
        }
        poses.push(Isometry3::from_parts(t, UnitQuaternion::new_normalize(q)));
    }
    if r.remaining() != 0 {
        return Err(Error::Parse(format!("{} trailing bytes after roadmap", r.remaining())));
    }
    Ok(Drm { dof, nodes, adjacency, collision_map, poses, grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drm::{build_drm, DrmBuildParams};
    use crate::world::{RobotModel, World};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> Drm {
        let world = World::new(RobotModel::point_robot(&[-5.0, -5.0], &[5.0, 5.0]).unwrap(), vec![]);
        let grid = Grid::planar_covering([-5.0, -5.0], [5.0, 5.0], 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = DrmBuildParams { n_nodes: 40, ..Default::default() };
        build_drm(&world, &[-5.0, -5.0], &[5.0, 5.0], &params, grid, &mut rng).unwrap()
    }

    #[test]
    fn round_trip() {
        let drm = sample();
        let bytes = encode_drm(&drm);
        assert_eq!(&bytes[..4], b"DRM1");
        let back = decode_drm(&bytes).unwrap();
        assert_eq!(back.nodes, drm.nodes);
        assert_eq!(back.adjacency, drm.adjacency);
        assert_eq!(back.collision_map, drm.collision_map);
        assert_eq!(back.grid, drm.grid);
        for (a, b) in back.poses.iter().zip(&drm.poses) {
            assert_eq!(a.translation, b.translation);
            assert!(a.rotation.angle_to(&b.rotation) < 1e-12);
        }
    }

    #[test]
    fn every_truncation_fails() {
        let bytes = encode_drm(&sample());
        for cut in (0..bytes.len()).step_by(7) {
            assert!(decode_drm(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_drm(&extra).is_err());
    }

    #[test]
    fn huge_counts_rejected_without_allocation() {
        let mut bytes = encode_drm(&sample());
        bytes[12..20].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(decode_drm(&bytes), Err(Error::Parse(_))));
    }
}
