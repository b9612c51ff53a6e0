//! Deployment geometry: macro sites, small cells and UEs for one drop, plus
//! the tier-1 wrap-around used for every distance computation.
//!
//! Seven hexagonal macro sites with three sectors each form the scaffolding.
//! The macro layer itself carries no traffic; it only positions the small
//! cells. Small cells come in groups of four (a building, a cluster or a
//! sector), and every small cell serves exactly `dl_ues_per_bs` downlink and
//! `ul_ues_per_bs` uplink UEs. UEs are dropped uniformly over their group's
//! area and kept only if the small cell with the strongest long-term received
//! power belongs to the group and still has room, so association by strongest
//! power and the fixed per-cell UE counts hold together.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::propagation::{link_gain_db, LinkClass, PropagationConfig};
use crate::rng::{derive_seed, stream, stream_rng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, angle_deg: f64) -> Self {
        let a = angle_deg.to_radians();
        Point::new(r * a.cos(), r * a.sin())
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point) -> f64 {
        self.sub(o).norm()
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }
}

/// Tier-1 wrap-around for a 7-site hexagonal cluster.
///
/// The cluster repeats on a lattice spanned by two vectors of length
/// `sqrt(7) * isd`; the six nearest translations together with the identity
/// give the seven images checked for every distance.
#[derive(Clone, Debug, PartialEq)]
pub struct WrapConfig {
    pub inter_site_distance_m: f64,
    pub basis: [Point; 2],
    offsets: [Point; 7],
}

impl WrapConfig {
    pub fn tier1(inter_site_distance_m: f64) -> Self {
        let a1 = Point::polar(inter_site_distance_m, 30.0);
        let a2 = Point::polar(inter_site_distance_m, 90.0);
        let t1 = a1.scale(2.0).add(a2);
        let t2 = a2.scale(3.0).sub(a1);
        let t3 = t2.sub(t1);
        let offsets = [
            Point::default(),
            t1,
            t1.scale(-1.0),
            t2,
            t2.scale(-1.0),
            t3,
            t3.scale(-1.0),
        ];
        WrapConfig {
            inter_site_distance_m,
            basis: [t1, t2],
            offsets,
        }
    }

    /// Identity followed by the six nearest cluster translations.
    pub fn image_offsets(&self) -> &[Point; 7] {
        &self.offsets
    }

    /// Shortest displacement from `a` to any image of `b`.
    pub fn wrapped_vector(&self, a: Point, b: Point) -> Point {
        let mut best = b.sub(a);
        let mut best_d2 = best.dot(best);
        for off in &self.offsets[1..] {
            let v = b.add(*off).sub(a);
            let d2 = v.dot(v);
            if d2 < best_d2 {
                best = v;
                best_d2 = d2;
            }
        }
        best
    }
}

/// Distance from `a` to the nearest of the seven images of `b`.
pub fn wrapped_distance(a: Point, b: Point, wrap: &WrapConfig) -> f64 {
    wrap.wrapped_vector(a, b).norm()
}

/// Euclidean or wrapped distance depending on whether a wrap is present.
pub fn planar_distance(a: Point, b: Point, wrap: Option<&WrapConfig>) -> f64 {
    match wrap {
        Some(w) => wrapped_distance(a, b, w),
        None => a.distance(b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    #[serde(alias = "indoor")]
    IndoorHotzone,
    #[serde(alias = "cluster")]
    OutdoorCluster,
    #[serde(alias = "uniform")]
    OutdoorUniform,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::IndoorHotzone,
        ScenarioKind::OutdoorCluster,
        ScenarioKind::OutdoorUniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::IndoorHotzone => "indoor_hotzone",
            ScenarioKind::OutdoorCluster => "outdoor_cluster",
            ScenarioKind::OutdoorUniform => "outdoor_uniform",
        }
    }

    /// Accepts the canonical name or the short alias.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "indoor_hotzone" | "indoor" => Some(ScenarioKind::IndoorHotzone),
            "outdoor_cluster" | "cluster" => Some(ScenarioKind::OutdoorCluster),
            "outdoor_uniform" | "uniform" => Some(ScenarioKind::OutdoorUniform),
            _ => None,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Dl,
    Ul,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Dl => "dl",
            Direction::Ul => "ul",
        }
    }
}

/// Geometry of a scenario. Everything dimensional is configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub kind: ScenarioKind,
    pub inter_site_distance_m: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub bs_per_group: usize,
    pub dl_ues_per_bs: usize,
    pub ul_ues_per_bs: usize,
    /// Indoor only: 1 (building at the site centre) or 3 (one per sector).
    pub buildings_per_site: usize,
    pub building_length_m: f64,
    pub building_width_m: f64,
    /// Outdoor cluster: small cells are dropped within this radius of the cluster centre.
    pub cluster_radius_m: f64,
    /// Outdoor cluster: UEs are dropped within this radius of the cluster centre.
    pub cluster_ue_radius_m: f64,
    pub min_bs_separation_m: f64,
    /// Minimum distance from a small cell (or cluster edge) to the macro site.
    pub min_macro_distance_m: f64,
    /// Rejection-sampling budget per group.
    pub max_placement_attempts: usize,
}

impl ScenarioParams {
    pub fn defaults_for(kind: ScenarioKind) -> Self {
        let base = ScenarioParams {
            kind,
            inter_site_distance_m: 500.0,
            bs_height_m: 10.0,
            ue_height_m: 1.5,
            bs_per_group: 4,
            dl_ues_per_bs: 10,
            ul_ues_per_bs: 10,
            buildings_per_site: 3,
            building_length_m: 120.0,
            building_width_m: 50.0,
            cluster_radius_m: 50.0,
            cluster_ue_radius_m: 70.0,
            min_bs_separation_m: 20.0,
            min_macro_distance_m: 75.0,
            max_placement_attempts: 200_000,
        };
        match kind {
            ScenarioKind::IndoorHotzone => ScenarioParams {
                bs_height_m: 6.0,
                ..base
            },
            ScenarioKind::OutdoorCluster => base,
            ScenarioKind::OutdoorUniform => ScenarioParams {
                min_bs_separation_m: 40.0,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("scenario.inter_site_distance_m", self.inter_site_distance_m),
            ("scenario.bs_height_m", self.bs_height_m),
            ("scenario.ue_height_m", self.ue_height_m),
            ("scenario.building_length_m", self.building_length_m),
            ("scenario.building_width_m", self.building_width_m),
            ("scenario.cluster_radius_m", self.cluster_radius_m),
            ("scenario.cluster_ue_radius_m", self.cluster_ue_radius_m),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::config(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.min_bs_separation_m >= 0.0 && self.min_macro_distance_m >= 0.0) {
            return Err(SimError::config(
                "scenario.min_bs_separation_m",
                "separations must be non-negative",
            ));
        }
        if self.bs_per_group == 0 {
            return Err(SimError::config("scenario.bs_per_group", "must be at least 1"));
        }
        if self.dl_ues_per_bs + self.ul_ues_per_bs == 0 {
            return Err(SimError::config("scenario.dl_ues_per_bs", "cells need at least one UE"));
        }
        if !matches!(self.buildings_per_site, 1 | 3) {
            return Err(SimError::config(
                "scenario.buildings_per_site",
                format!("must be 1 or 3, got {}", self.buildings_per_site),
            ));
        }
        if self.max_placement_attempts == 0 {
            return Err(SimError::config("scenario.max_placement_attempts", "must be positive"));
        }
        Ok(())
    }
}

/// Position, height and identity of a radio node as seen by propagation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub pos: Point,
    pub height_m: f64,
    /// Random identity used to key per-link random draws.
    pub key: u64,
    /// Building the node is inside, if any.
    pub building: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub site: usize,
    pub azimuth_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallCell {
    pub id: usize,
    pub pos: Point,
    pub height_m: f64,
    pub site: usize,
    /// Global sector index, `site * 3 + k`.
    pub sector: usize,
    /// Building, cluster or sector the cell was dropped in.
    pub group: usize,
    pub key: u64,
    pub building: Option<u32>,
}

impl SmallCell {
    pub fn node(&self) -> Node {
        Node {
            pos: self.pos,
            height_m: self.height_m,
            key: self.key,
            building: self.building,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ue {
    pub id: usize,
    pub pos: Point,
    pub height_m: f64,
    pub cell: usize,
    pub direction: Direction,
    pub key: u64,
    pub building: Option<u32>,
}

impl Ue {
    pub fn node(&self) -> Node {
        Node {
            pos: self.pos,
            height_m: self.height_m,
            key: self.key,
            building: self.building,
        }
    }
}

/// All nodes of one drop.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkLayout {
    /// `None` for hand-built layouts.
    pub scenario: Option<ScenarioKind>,
    pub sites: Vec<Point>,
    pub sectors: Vec<Sector>,
    pub small_cells: Vec<SmallCell>,
    pub ues: Vec<Ue>,
    pub wrap: Option<WrapConfig>,
    dl_members: Vec<Vec<usize>>,
    ul_members: Vec<Vec<usize>>,
}

impl NetworkLayout {
    /// Layout from explicit nodes. Cell and UE ids must equal their indices.
    pub fn custom(small_cells: Vec<SmallCell>, ues: Vec<Ue>, wrap: Option<WrapConfig>) -> Result<Self> {
        for (i, c) in small_cells.iter().enumerate() {
            if c.id != i {
                return Err(SimError::Layout(format!("small cell at index {i} has id {}", c.id)));
            }
        }
        for (i, u) in ues.iter().enumerate() {
            if u.id != i {
                return Err(SimError::Layout(format!("UE at index {i} has id {}", u.id)));
            }
            if u.cell >= small_cells.len() {
                return Err(SimError::Layout(format!("UE {i} references missing cell {}", u.cell)));
            }
        }
        let mut layout = NetworkLayout {
            scenario: None,
            sites: Vec::new(),
            sectors: Vec::new(),
            small_cells,
            ues,
            wrap,
            dl_members: Vec::new(),
            ul_members: Vec::new(),
        };
        layout.index_members();
        Ok(layout)
    }

    fn index_members(&mut self) {
        let n = self.small_cells.len();
        self.dl_members = vec![Vec::new(); n];
        self.ul_members = vec![Vec::new(); n];
        for ue in &self.ues {
            match ue.direction {
                Direction::Dl => self.dl_members[ue.cell].push(ue.id),
                Direction::Ul => self.ul_members[ue.cell].push(ue.id),
            }
        }
    }

    pub fn n_cells(&self) -> usize {
        self.small_cells.len()
    }

    pub fn n_ues(&self) -> usize {
        self.ues.len()
    }

    /// Downlink UEs served by `cell`, ascending id.
    pub fn dl_ues(&self, cell: usize) -> &[usize] {
        &self.dl_members[cell]
    }

    /// Uplink UEs served by `cell`, ascending id.
    pub fn ul_ues(&self, cell: usize) -> &[usize] {
        &self.ul_members[cell]
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        planar_distance(a, b, self.wrap.as_ref())
    }

    /// One row per node: `id,kind,x,y,z,cell,direction`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "kind", "x", "y", "z", "cell", "direction"])?;
        for c in &self.small_cells {
            w.write_record([
                c.id.to_string(),
                "bs".into(),
                format!("{:.3}", c.pos.x),
                format!("{:.3}", c.pos.y),
                format!("{:.3}", c.height_m),
                c.id.to_string(),
                String::new(),
            ])?;
        }
        for u in &self.ues {
            w.write_record([
                u.id.to_string(),
                "ue".into(),
                format!("{:.3}", u.pos.x),
                format!("{:.3}", u.pos.y),
                format!("{:.3}", u.height_m),
                u.cell.to_string(),
                u.direction.name().into(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Centres of the seven macro sites: the origin and its six neighbours.
pub fn site_centers(isd: f64) -> Vec<Point> {
    let mut sites = vec![Point::default()];
    sites.extend((0..6).map(|k| Point::polar(isd, 30.0 + 60.0 * k as f64)));
    sites
}

/// Sector boresights (degrees) of every site.
pub const SECTOR_AZIMUTHS_DEG: [f64; 3] = [30.0, 150.0, 270.0];

/// Whether `p` lies in the hexagonal coverage area of the site at `center`.
pub fn in_site_hexagon(center: Point, isd: f64, p: Point) -> bool {
    let d = p.sub(center);
    [30.0f64, 90.0, 150.0].iter().all(|a| {
        let n = Point::polar(1.0, *a);
        d.dot(n).abs() <= isd / 2.0 + 1e-9
    })
}

fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let mut d = (a - b) % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d < -180.0 {
        d += 360.0;
    }
    d.abs()
}

/// Whether `p` lies in the 120-degree sector with boresight `azimuth_deg`.
pub fn in_sector(center: Point, isd: f64, azimuth_deg: f64, p: Point) -> bool {
    if !in_site_hexagon(center, isd, p) {
        return false;
    }
    let d = p.sub(center);
    let ang = d.y.atan2(d.x).to_degrees();
    angle_diff_deg(ang, azimuth_deg) <= 60.0
}

fn sample_in_disc<R: Rng>(rng: &mut R, center: Point, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let th = rng.random::<f64>() * 2.0 * PI;
    center.add(Point::new(r * th.cos(), r * th.sin()))
}

fn sample_in_sector<R: Rng>(rng: &mut R, center: Point, isd: f64, azimuth_deg: f64) -> Point {
    let radius = isd / 3f64.sqrt();
    loop {
        let p = sample_in_disc(rng, center, radius);
        if in_sector(center, isd, azimuth_deg, p) {
            return p;
        }
    }
}

/// Area over which one group's UEs are dropped.
#[derive(Clone, Copy, Debug)]
enum DropArea {
    Rect { center: Point, half_len: f64, half_wid: f64 },
    Disc { center: Point, radius: f64 },
    Sector { site: Point, azimuth_deg: f64 },
}

impl DropArea {
    fn sample<R: Rng>(&self, rng: &mut R, isd: f64) -> Point {
        match *self {
            DropArea::Rect { center, half_len, half_wid } => center.add(Point::new(
                rng.random_range(-half_len..half_len),
                rng.random_range(-half_wid..half_wid),
            )),
            DropArea::Disc { center, radius } => sample_in_disc(rng, center, radius),
            DropArea::Sector { site, azimuth_deg } => sample_in_sector(rng, site, isd, azimuth_deg),
        }
    }
}

struct Group {
    site: usize,
    sector: usize,
    area: DropArea,
    building: Option<u32>,
    cells: Vec<usize>,
}

/// Generates one drop of `params.kind`.
///
/// Deterministic in `seed`: positions come from the layout stream, and the
/// shadowing used for association is the same keyed draw the gain matrix
/// later uses, so re-deriving association from the matrix reproduces the
/// stored cells.
pub fn generate_layout(
    kind: ScenarioKind,
    seed: u64,
    params: &ScenarioParams,
    propagation: &PropagationConfig,
) -> Result<NetworkLayout> {
    if params.kind != kind {
        return Err(SimError::config(
            "scenario.kind",
            format!("parameters are for {} but {} was requested", params.kind, kind),
        ));
    }
    params.validate()?;
    let mut rng = stream_rng(seed, stream::LAYOUT);
    let shadow_seed = derive_seed(seed, stream::SHADOWING);
    let isd = params.inter_site_distance_m;
    let sites = site_centers(isd);
    let wrap = WrapConfig::tier1(isd);
    let sectors: Vec<Sector> = (0..sites.len())
        .flat_map(|site| SECTOR_AZIMUTHS_DEG.iter().map(move |&a| Sector { site, azimuth_deg: a }))
        .collect();

    let mut cells: Vec<SmallCell> = Vec::new();
    let mut groups: Vec<Group> = Vec::new();

    match kind {
        ScenarioKind::IndoorHotzone => {
            for (site, &sc) in sites.iter().enumerate() {
                for b in 0..params.buildings_per_site {
                    let (center, sector) = if params.buildings_per_site == 1 {
                        (sc, site * 3)
                    } else {
                        let az = SECTOR_AZIMUTHS_DEG[b];
                        (sc.add(Point::polar(isd / 4.0, az)), site * 3 + b)
                    };
                    let g = groups.len();
                    let building = Some(g as u32);
                    let n = params.bs_per_group;
                    let pitch = params.building_length_m / n as f64;
                    let mut members = Vec::new();
                    for k in 0..n {
                        let x = -params.building_length_m / 2.0 + pitch * (k as f64 + 0.5);
                        members.push(cells.len());
                        cells.push(SmallCell {
                            id: cells.len(),
                            pos: center.add(Point::new(x, 0.0)),
                            height_m: params.bs_height_m,
                            site,
                            sector,
                            group: g,
                            key: rng.random(),
                            building,
                        });
                    }
                    groups.push(Group {
                        site,
                        sector,
                        area: DropArea::Rect {
                            center,
                            half_len: params.building_length_m / 2.0,
                            half_wid: params.building_width_m / 2.0,
                        },
                        building,
                        cells: members,
                    });
                }
            }
        }
        ScenarioKind::OutdoorCluster | ScenarioKind::OutdoorUniform => {
            for (si, sector) in sectors.iter().enumerate() {
                let sc = sites[sector.site];
                let g = groups.len();
                let area = if kind == ScenarioKind::OutdoorCluster {
                    let min_r = params.min_macro_distance_m + params.cluster_radius_m;
                    let center = place_with_retries(params, &mut rng, |rng| {
                        let p = sample_in_sector(rng, sc, isd, sector.azimuth_deg);
                        (p.distance(sc) >= min_r).then_some(p)
                    })?;
                    DropArea::Disc {
                        center,
                        radius: params.cluster_ue_radius_m,
                    }
                } else {
                    DropArea::Sector {
                        site: sc,
                        azimuth_deg: sector.azimuth_deg,
                    }
                };
                let mut members = Vec::new();
                for _ in 0..params.bs_per_group {
                    let placed = &cells;
                    let pos = place_with_retries(params, &mut rng, |rng| {
                        let p = match area {
                            DropArea::Disc { center, .. } => sample_in_disc(rng, center, params.cluster_radius_m),
                            _ => sample_in_sector(rng, sc, isd, sector.azimuth_deg),
                        };
                        let far_from_macro = sites.iter().all(|&s| wrapped_distance(p, s, &wrap) >= params.min_macro_distance_m);
                        let separated = placed
                            .iter()
                            .all(|c| wrapped_distance(p, c.pos, &wrap) >= params.min_bs_separation_m);
                        (far_from_macro && separated).then_some(p)
                    })?;
                    members.push(cells.len());
                    cells.push(SmallCell {
                        id: cells.len(),
                        pos,
                        height_m: params.bs_height_m,
                        site: sector.site,
                        sector: si,
                        group: g,
                        key: rng.random(),
                        building: None,
                    });
                }
                groups.push(Group {
                    site: sector.site,
                    sector: si,
                    area,
                    building: None,
                    cells: members,
                });
            }
        }
    }

    let cell_nodes: Vec<Node> = cells.iter().map(SmallCell::node).collect();
    let quota = params.dl_ues_per_bs + params.ul_ues_per_bs;
    let mut placed: Vec<(usize, Direction, Ue)> = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        let mut dl_count = vec![0usize; group.cells.len()];
        let mut ul_count = vec![0usize; group.cells.len()];
        let mut remaining = quota * group.cells.len();
        let mut attempts = 0usize;
        while remaining > 0 {
            attempts += 1;
            if attempts > params.max_placement_attempts {
                return Err(SimError::Layout(format!(
                    "group {g} (site {}, sector {}): could not associate {remaining} more UEs within {} attempts",
                    group.site, group.sector, params.max_placement_attempts
                )));
            }
            let pos = group.area.sample(&mut rng, isd);
            let key: u64 = rng.random();
            let cand = Node {
                pos,
                height_m: params.ue_height_m,
                key,
                building: group.building,
            };
            let best = strongest_cell(&cell_nodes, &cand, propagation, Some(&wrap), shadow_seed);
            let Some(local) = group.cells.iter().position(|&c| c == best) else {
                continue;
            };
            let dir = if dl_count[local] < params.dl_ues_per_bs
                && (dl_count[local] <= ul_count[local] || ul_count[local] >= params.ul_ues_per_bs)
            {
                Direction::Dl
            } else if ul_count[local] < params.ul_ues_per_bs {
                Direction::Ul
            } else {
                continue;
            };
            match dir {
                Direction::Dl => dl_count[local] += 1,
                Direction::Ul => ul_count[local] += 1,
            }
            remaining -= 1;
            placed.push((
                best,
                dir,
                Ue {
                    id: 0,
                    pos,
                    height_m: params.ue_height_m,
                    cell: best,
                    direction: dir,
                    key,
                    building: group.building,
                },
            ));
        }
    }
    // Stable ordering: by cell, downlink before uplink, then drop order.
    placed.sort_by_key(|(cell, dir, _)| (*cell, *dir == Direction::Ul));
    let ues: Vec<Ue> = placed
        .into_iter()
        .enumerate()
        .map(|(id, (_, _, ue))| Ue { id, ..ue })
        .collect();

    let mut layout = NetworkLayout {
        scenario: Some(kind),
        sites,
        sectors,
        small_cells: cells,
        ues,
        wrap: Some(wrap),
        dl_members: Vec::new(),
        ul_members: Vec::new(),
    };
    layout.index_members();
    Ok(layout)
}

fn place_with_retries<R: Rng, F>(params: &ScenarioParams, rng: &mut R, mut f: F) -> Result<Point>
where
    F: FnMut(&mut R) -> Option<Point>,
{
    for _ in 0..params.max_placement_attempts {
        if let Some(p) = f(rng) {
            return Ok(p);
        }
    }
    Err(SimError::Layout(format!(
        "minimum separation unsatisfiable after {} attempts (bs separation {} m, macro distance {} m)",
        params.max_placement_attempts, params.min_bs_separation_m, params.min_macro_distance_m
    )))
}

/// Cell with the largest long-term gain towards `ue` (lowest index on ties).
pub fn strongest_cell(
    cells: &[Node],
    ue: &Node,
    propagation: &PropagationConfig,
    wrap: Option<&WrapConfig>,
    shadow_seed: u64,
) -> usize {
    let mut best = 0;
    let mut best_gain = f64::NEG_INFINITY;
    for (i, c) in cells.iter().enumerate() {
        let g = link_gain_db(c, ue, LinkClass::BsUe, propagation, wrap, shadow_seed);
        if g > best_gain {
            best_gain = g;
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ISD: f64 = 500.0;

    #[test]
    fn identity_and_symmetry() {
        let w = WrapConfig::tier1(ISD);
        let a = Point::new(12.0, -40.0);
        let b = Point::new(-300.0, 410.0);
        assert_eq!(wrapped_distance(a, a, &w), 0.0);
        assert!((wrapped_distance(a, b, &w) - wrapped_distance(b, a, &w)).abs() < 1e-9);
    }

    #[test]
    fn translations_have_cluster_length() {
        let w = WrapConfig::tier1(ISD);
        for off in &w.image_offsets()[1..] {
            assert!((off.norm() - 7f64.sqrt() * ISD).abs() < 1e-9);
        }
        // Lattice cell area equals seven site hexagons.
        let [t1, t2] = w.basis;
        let det = (t1.x * t2.y - t1.y * t2.x).abs();
        let hex_area = 3f64.sqrt() / 2.0 * ISD * ISD;
        assert!((det - 7.0 * hex_area).abs() < 1e-6);
    }

    #[test]
    fn east_west_edges_are_close_under_wrap() {
        // Worked by hand. Sites sit at the origin and 500 m away along 30, 90, .. degrees,
        // so on the x axis the cluster spans about [-577, 577]. The translations are
        // T1 = (866.03, 1000), T2 = (-433.01, 1250), T2-T1 = (-1299.04, 250).
        // For a = (560, 0) and b = (-560, 0) the images of b are
        //   b               -> 1120 m
        //   b - (T2-T1)     = (739.04, -250)  -> hypot(179.04, 250) = 307.5 m
        //   b + T1          = (306.03, 1000)  -> ~1032 m
        // and the rest are farther.
        let w = WrapConfig::tier1(ISD);
        let a = Point::new(560.0, 0.0);
        let b = Point::new(-560.0, 0.0);
        let d = wrapped_distance(a, b, &w);
        let expected = (1299.0381f64 - 1120.0).hypot(250.0);
        assert!((d - expected).abs() < 1e-3, "{d} vs {expected}");
        assert!(d < a.distance(b));
    }

    fn nearest_site(p: Point, lattice_sites: &[Point]) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, s) in lattice_sites.iter().enumerate() {
            let d = p.distance(*s);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }

    proptest! {
        #[test]
        fn wrapped_never_exceeds_euclidean(ax in -600.0..600.0f64, ay in -600.0..600.0f64,
                                           bx in -600.0..600.0f64, by in -600.0..600.0f64) {
            let w = WrapConfig::tier1(ISD);
            let a = Point::new(ax, ay);
            let b = Point::new(bx, by);
            prop_assert!(wrapped_distance(a, b, &w) <= a.distance(b) + 1e-9);
            prop_assert!((wrapped_distance(a, b, &w) - wrapped_distance(b, a, &w)).abs() < 1e-6);
        }

        #[test]
        fn images_tile_without_overlap(qx in -2500.0..2500.0f64, qy in -2500.0..2500.0f64) {
            // Exactly one translate of q by the cluster lattice falls in the
            // coverage of the seven central sites.
            let w = WrapConfig::tier1(ISD);
            let [t1, t2] = w.basis;
            let central = site_centers(ISD);
            // Hex lattice sites around the central cluster, far enough to resolve nearest-site.
            let a1 = Point::polar(ISD, 30.0);
            let a2 = Point::polar(ISD, 90.0);
            let mut lattice = Vec::new();
            for i in -12..=12 {
                for j in -12..=12 {
                    lattice.push(a1.scale(i as f64).add(a2.scale(j as f64)));
                }
            }
            let central_idx: Vec<usize> = central.iter().map(|c| nearest_site(*c, &lattice)).collect();
            let q = Point::new(qx, qy);
            let mut hits = 0;
            for n1 in -4..=4 {
                for n2 in -4..=4 {
                    let img = q.add(t1.scale(n1 as f64)).add(t2.scale(n2 as f64));
                    if img.norm() > 2000.0 { continue; }
                    if central_idx.contains(&nearest_site(img, &lattice)) {
                        hits += 1;
                    }
                }
            }
            prop_assert_eq!(hits, 1);
        }
    }

    #[test]
    fn sector_membership() {
        let c = Point::default();
        assert!(in_sector(c, ISD, 30.0, Point::polar(100.0, 30.0)));
        assert!(!in_sector(c, ISD, 30.0, Point::polar(100.0, 150.0)));
        assert!(in_sector(c, ISD, 270.0, Point::polar(200.0, 250.0)));
        assert!(!in_site_hexagon(c, ISD, Point::polar(300.0, 30.0)));
    }
}
