use crate::model::{BBox, LabelRaster, PixelPoint};

/// A maximal 8-connected group of pixels sharing one class id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelComponent {
    /// Pixels in row-major scan order.
    pub pixels: Vec<PixelPoint>,
    pub bbox: BBox,
}

impl PixelComponent {
    pub fn size(&self) -> usize {
        self.pixels.len()
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        Self { parent: Vec::new() }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

const NONE: u32 = u32::MAX;

/// Labels the 8-connected components of pixels equal to `class_id`.
///
/// Two-pass scan with a disjoint-set over provisional labels. Components are
/// returned ordered by bbox top edge, then bbox left edge, then first pixel
/// in scan order.
pub fn connected_components(raster: &LabelRaster, class_id: u8) -> Vec<PixelComponent> {
    let (w, h) = (raster.width() as usize, raster.height() as usize);
    let classes = raster.classes();
    let mut labels = vec![NONE; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if classes[i] != class_id {
                continue;
            }
            // Already-visited neighbours: W, NW, N, NE.
            let mut neighbours = [NONE; 4];
            if x > 0 {
                neighbours[0] = labels[i - 1];
            }
            if y > 0 {
                let up = i - w;
                neighbours[2] = labels[up];
                if x > 0 {
                    neighbours[1] = labels[up - 1];
                }
                if x + 1 < w {
                    neighbours[3] = labels[up + 1];
                }
            }
            let mut label = NONE;
            for &n in neighbours.iter().filter(|&&n| n != NONE) {
                label = if label == NONE { n } else { sets.union(label, n) };
            }
            labels[i] = if label == NONE { sets.make() } else { label };
        }
    }

    let mut slot_of_root = vec![NONE; sets.parent.len()];
    let mut comps: Vec<(usize, PixelComponent)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if labels[i] == NONE {
                continue;
            }
            let root = sets.find(labels[i]) as usize;
            let p = PixelPoint::new(x as i32, y as i32);
            if slot_of_root[root] == NONE {
                slot_of_root[root] = comps.len() as u32;
                comps.push((
                    i,
                    PixelComponent {
                        pixels: Vec::new(),
                        bbox: BBox::from([p.x, p.y, p.x, p.y]),
                    },
                ));
            }
            let c = &mut comps[slot_of_root[root] as usize].1;
            c.pixels.push(p);
            c.bbox.include(p);
        }
    }
    comps.sort_by_key(|(first, c)| (c.bbox.min_y, c.bbox.min_x, *first));
    comps.into_iter().map(|(_, c)| c).collect()
}
