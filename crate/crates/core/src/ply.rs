//! Minimal PLY reader and writer for colored point clouds.
//!
//! Reads `ascii 1.0` and `binary_little_endian 1.0` files. The vertex element
//! must carry `x`, `y`, `z` and `red`, `green`, `blue`; every other property
//! and element is skipped.

use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::scene::{Point, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }

    /// Float32 tokens go through `f32` so ASCII and binary files agree bit for bit.
    fn parse_ascii(self, tok: &str) -> Option<f64> {
        match self {
            Scalar::F32 => tok.parse::<f32>().ok().map(f64::from),
            _ => tok.parse::<f64>().ok(),
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Scalar::F32 | Scalar::F64)
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug)]
struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    body_offset: usize,
}

fn parse_header(data: &[u8]) -> Result<Header> {
    let bad = |m: &str| Error::PlyHeader(m.to_owned());
    let mut offset = 0;
    let mut next_line = || -> Result<&str> {
        let rest = &data[offset..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("unexpected end of file before end_header"))?;
        offset += end + 1;
        std::str::from_utf8(&rest[..end])
            .map(|s| s.trim_end_matches('\r'))
            .map_err(|_| bad("header is not valid UTF-8"))
    };

    if next_line()?.trim() != "ply" {
        return Err(bad("missing `ply` magic line"));
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = next_line()?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                format = Some(match (tok.next(), tok.next()) {
                    (Some("ascii"), Some("1.0")) => PlyFormat::Ascii,
                    (Some("binary_little_endian"), Some("1.0")) => PlyFormat::BinaryLittleEndian,
                    (Some(f), _) => return Err(Error::PlyHeader(format!("unsupported format `{f}`"))),
                    _ => return Err(bad("incomplete format line")),
                });
            }
            Some("element") => {
                let name = tok.next().ok_or_else(|| bad("element without a name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| Error::PlyHeader(format!("element `{name}` has no valid count")))?;
                elements.push(Element {
                    name: name.to_owned(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| bad("property declared before any element"))?;
                let words: Vec<&str> = tok.collect();
                let prop = match words.as_slice() {
                    ["list", c, i, _name] => Property::List {
                        count: Scalar::parse(c).ok_or_else(|| Error::PlyHeader(format!("unknown type `{c}`")))?,
                        item: Scalar::parse(i).ok_or_else(|| Error::PlyHeader(format!("unknown type `{i}`")))?,
                    },
                    [ty, name] => Property::Scalar {
                        name: (*name).to_owned(),
                        ty: Scalar::parse(ty).ok_or_else(|| Error::PlyHeader(format!("unknown type `{ty}`")))?,
                    },
                    _ => return Err(Error::PlyHeader(format!("cannot parse `{line}`"))),
                };
                el.properties.push(prop);
            }
            Some("end_header") => break,
            Some(other) => return Err(Error::PlyHeader(format!("unexpected keyword `{other}`"))),
        }
    }
    Ok(Header {
        format: format.ok_or_else(|| bad("missing format line"))?,
        elements,
        body_offset: offset,
    })
}

/// Positions of the six required properties within the vertex element.
struct VertexLayout {
    slots: [usize; 6],
    color_ty: Scalar,
}

impl VertexLayout {
    fn new(el: &Element) -> Result<Self> {
        const NAMES: [&str; 6] = ["x", "y", "z", "red", "green", "blue"];
        let mut slots = [0; 6];
        let mut color_ty = Scalar::U8;
        for (k, want) in NAMES.iter().enumerate() {
            let pos = el.properties.iter().position(|p| match p {
                Property::Scalar { name, .. } => name == want,
                Property::List { .. } => false,
            });
            slots[k] = pos.ok_or(Error::PlyMissingProperty(want))?;
            if k >= 3 {
                if let Property::Scalar { ty, .. } = el.properties[slots[k]] {
                    color_ty = ty;
                }
            }
        }
        Ok(Self { slots, color_ty })
    }

    fn point(&self, values: &[f64]) -> Point {
        let pos = Vector3::new(values[self.slots[0]], values[self.slots[1]], values[self.slots[2]]);
        let scale = if self.color_ty.is_integer() { 1.0 / 255.0 } else { 1.0 };
        let color = [3, 4, 5].map(|k| ((values[self.slots[k]] * scale) as f32).clamp(0.0, 1.0));
        Point::new(pos, color)
    }
}

/// Reads a scene from a PLY file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Scene::new(parse_points(&data)?)
}

/// Parses the vertex element of an in-memory PLY file.
pub fn parse_points(data: &[u8]) -> Result<Vec<Point>> {
    let header = parse_header(data)?;
    let vi = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::PlyHeader("no vertex element".into()))?;
    let vertex = &header.elements[vi];
    let layout = VertexLayout::new(vertex)?;
    if vertex.count == 0 {
        return Err(Error::EmptyScene);
    }
    let body = &data[header.body_offset..];
    match header.format {
        PlyFormat::Ascii => read_ascii(body, &header.elements[..vi], vertex, &layout),
        PlyFormat::BinaryLittleEndian => read_binary(body, &header.elements[..vi], vertex, &layout),
    }
}

fn read_ascii(body: &[u8], before: &[Element], vertex: &Element, layout: &VertexLayout) -> Result<Vec<Point>> {
    let text = std::str::from_utf8(body).map_err(|_| Error::PlyBody("ASCII body is not UTF-8".into()))?;
    let skip: usize = before.iter().map(|e| e.count).sum();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).skip(skip);
    let mut values = Vec::with_capacity(vertex.properties.len());
    let mut points = Vec::with_capacity(vertex.count);
    for i in 0..vertex.count {
        let line = lines
            .next()
            .ok_or_else(|| Error::PlyBody(format!("expected {} vertices, found {i}", vertex.count)))?;
        values.clear();
        let mut tok = line.split_whitespace();
        for prop in &vertex.properties {
            let mut next = |ty: Scalar| -> Result<f64> {
                tok.next()
                    .and_then(|t| ty.parse_ascii(t))
                    .ok_or_else(|| Error::PlyBody(format!("vertex {i}: missing or invalid value")))
            };
            match *prop {
                Property::Scalar { ty, .. } => values.push(next(ty)?),
                Property::List { count, item } => {
                    let n = next(count)? as usize;
                    for _ in 0..n {
                        next(item)?;
                    }
                    values.push(f64::NAN);
                }
            }
        }
        points.push(layout.point(&values));
    }
    Ok(points)
}

fn read_binary(body: &[u8], before: &[Element], vertex: &Element, layout: &VertexLayout) -> Result<Vec<Point>> {
    let mut cursor = 0usize;
    let truncated = || Error::PlyBody("binary body is truncated".into());
    let take = |ty: Scalar, cursor: &mut usize| -> Result<f64> {
        let end = *cursor + ty.size();
        let bytes = body.get(*cursor..end).ok_or_else(truncated)?;
        *cursor = end;
        Ok(ty.read_le(bytes))
    };
    for el in before {
        for _ in 0..el.count {
            for prop in &el.properties {
                match *prop {
                    Property::Scalar { ty, .. } => {
                        take(ty, &mut cursor)?;
                    }
                    Property::List { count, item } => {
                        let n = take(count, &mut cursor)? as usize;
                        cursor += n * item.size();
                    }
                }
            }
        }
    }
    let mut values = vec![0.0; vertex.properties.len()];
    let mut points = Vec::with_capacity(vertex.count);
    for _ in 0..vertex.count {
        for (slot, prop) in vertex.properties.iter().enumerate() {
            values[slot] = match *prop {
                Property::Scalar { ty, .. } => take(ty, &mut cursor)?,
                Property::List { count, item } => {
                    let n = take(count, &mut cursor)? as usize;
                    cursor += n * item.size();
                    f64::NAN
                }
            };
        }
        points.push(layout.point(&values));
    }
    Ok(points)
}

/// Serializes points with float32 positions and uint8 colors.
pub fn write_points(points: &[Point], format: PlyFormat, out: &mut impl Write) -> std::io::Result<()> {
    let fmt = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    write!(
        out,
        "ply\nformat {fmt} 1.0\nelement vertex {}\n\
         property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
        points.len()
    )?;
    for p in points {
        let pos = p.position.map(|c| c as f32);
        let rgb = p.rgb8();
        match format {
            PlyFormat::Ascii => writeln!(out, "{} {} {} {} {} {}", pos.x, pos.y, pos.z, rgb[0], rgb[1], rgb[2])?,
            PlyFormat::BinaryLittleEndian => {
                for c in pos.iter() {
                    out.write_all(&c.to_le_bytes())?;
                }
                out.write_all(&rgb)?;
            }
        }
    }
    Ok(())
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>, format: PlyFormat) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_points(scene.points(), format, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}
