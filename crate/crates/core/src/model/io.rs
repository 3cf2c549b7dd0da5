//! Text weights file:
//!
//! ```text
//! squareval-model v1
//! meta seed 42
//! W1 64 72
//! <64 lines of 72 values>
//! b1 1 64
//! <1 line of 64 values>
//! W2 32 64
//! ...
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every f64.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Dense, ModelError, ModelParams, LAYER_NAMES};

pub const MODEL_HEADER: &str = "squareval-model v1";

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub params: ModelParams,
    /// Free-form key/value pairs (seed, training config, ...), in file order.
    pub metadata: Vec<(String, String)>,
}

impl ModelFile {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn write_rows(out: &mut impl Write, tag: &str, rows: usize, cols: usize, values: &[f64]) -> std::io::Result<()> {
    writeln!(out, "{tag} {rows} {cols}")?;
    for row in values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_model(mut out: impl Write, model: &ModelFile) -> Result<(), ModelError> {
    model.params.check_shapes()?;
    writeln!(out, "{MODEL_HEADER}")?;
    for (key, value) in &model.metadata {
        if key.is_empty() || key.contains(char::is_whitespace) || value.contains('\n') {
            return Err(ModelError::InvalidConfig(format!("unwritable metadata entry '{key}'")));
        }
        writeln!(out, "meta {key} {value}")?;
    }
    for (i, layer) in model.params.layers.iter().enumerate() {
        write_rows(&mut out, &format!("W{}", i + 1), layer.rows, layer.cols, &layer.weights)?;
        write_rows(&mut out, &format!("b{}", i + 1), 1, layer.rows, &layer.bias)?;
    }
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
    pushed: Option<String>,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self, expecting: &str) -> Result<String, ModelError> {
        if let Some(line) = self.pushed.take() {
            return Ok(line);
        }
        match self.inner.next() {
            Some(line) => {
                self.number += 1;
                Ok(line?)
            }
            None => Err(ModelError::Truncated(format!("expected {expecting} after line {}", self.number))),
        }
    }

    fn parse_err(&self, reason: String) -> ModelError {
        ModelError::Parse { line: self.number, reason }
    }
}

fn read_block<R: BufRead>(
    lines: &mut Lines<R>,
    tag: &str,
    layer: &str,
    expected: (usize, usize),
) -> Result<Vec<f64>, ModelError> {
    let header = lines.next(&format!("'{tag}' block"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let shape = match fields.as_slice() {
        [t, r, c] if *t == tag => match (r.parse::<usize>(), c.parse::<usize>()) {
            (Ok(r), Ok(c)) => (r, c),
            _ => return Err(lines.parse_err(format!("bad shape in '{header}'"))),
        },
        _ => return Err(lines.parse_err(format!("expected '{tag} <rows> <cols>', found '{header}'"))),
    };
    if shape != expected {
        return Err(ModelError::LayerShape { layer: layer.to_string(), expected, found: shape });
    }
    let mut values = Vec::with_capacity(shape.0 * shape.1);
    for r in 0..shape.0 {
        let line = lines.next(&format!("row {} of {tag}", r + 1))?;
        let start = values.len();
        for token in line.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| lines.parse_err(format!("invalid number '{token}'")))?;
            values.push(v);
        }
        let found = values.len() - start;
        if found != shape.1 {
            return Err(lines.parse_err(format!("{tag} row {} has {found} values, expected {}", r + 1, shape.1)));
        }
    }
    Ok(values)
}

pub fn read_model(input: impl Read) -> Result<ModelFile, ModelError> {
    let mut lines = Lines { inner: BufReader::new(input).lines(), number: 0, pushed: None };
    let header = lines.next("header")?;
    if header.trim_end() != MODEL_HEADER {
        return Err(ModelError::Version(header));
    }
    let mut metadata = Vec::new();
    loop {
        let line = lines.next("'W1' block")?;
        match line.strip_prefix("meta ") {
            Some(rest) => {
                let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
                metadata.push((key.to_string(), value.to_string()));
            }
            None => {
                lines.pushed = Some(line);
                break;
            }
        }
    }
    let mut params = ModelParams::zeros();
    for (i, layer) in params.layers.iter_mut().enumerate() {
        let name = LAYER_NAMES[i];
        let (rows, cols) = (layer.rows, layer.cols);
        let weights = read_block(&mut lines, &format!("W{}", i + 1), name, (rows, cols))?;
        let bias = read_block(&mut lines, &format!("b{}", i + 1), name, (1, rows))?;
        *layer = Dense { rows, cols, weights, bias };
    }
    for extra in lines.inner {
        let extra = extra?;
        lines.number += 1;
        if !extra.trim().is_empty() {
            return Err(ModelError::Parse {
                line: lines.number,
                reason: format!("unexpected trailing content '{extra}'"),
            });
        }
    }
    Ok(ModelFile { params, metadata })
}

pub fn save_model(path: impl AsRef<Path>, model: &ModelFile) -> Result<(), ModelError> {
    write_model(BufWriter::new(File::create(path)?), model)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile, ModelError> {
    read_model(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ModelFile {
        let mut params = ModelParams::init(9);
        params.set_output_bias(-0.123_456_789_012_345_68);
        params.layers[0].bias[3] = 1e-300;
        params.layers[1].bias[0] = -f64::MIN_POSITIVE;
        ModelFile { params, metadata: vec![("seed".into(), "9".into()), ("lr".into(), "0.001".into())] }
    }

    fn to_text(model: &ModelFile) -> String {
        let mut buf = Vec::new();
        write_model(&mut buf, model).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let model = sample();
        let text = to_text(&model);
        assert!(text.starts_with("squareval-model v1\nmeta seed 9\nmeta lr 0.001\nW1 64 72\n"));
        let back = read_model(text.as_bytes()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.meta("seed"), Some("9"));
        assert_eq!(to_text(&back), text);
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("squareval-model-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.txt");
        save_model(&path, &sample()).unwrap();
        assert_eq!(load_model(&path).unwrap(), sample());
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn truncated_file() {
        let text = to_text(&sample());
        let cut: String = text.lines().take(80).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_model(cut.as_bytes()), Err(ModelError::Truncated(_))));
        let header_only = "squareval-model v1\n";
        assert!(matches!(read_model(header_only.as_bytes()), Err(ModelError::Truncated(_))));
    }

    #[test]
    fn wrong_shape_names_layer() {
        let text = to_text(&sample()).replace("W2 32 64", "W2 16 64");
        match read_model(text.as_bytes()) {
            Err(ModelError::LayerShape { layer, expected, found }) => {
                assert_eq!(layer, "hidden2");
                assert_eq!(expected, (32, 64));
                assert_eq!(found, (16, 64));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_header_and_numbers() {
        assert!(matches!(read_model("squareval-model v2\n".as_bytes()), Err(ModelError::Version(_))));
        let text = to_text(&sample());
        let mut lines: Vec<&str> = text.lines().collect();
        lines[5] = "1.0 oops";
        let broken = lines.join("\n");
        assert!(matches!(read_model(broken.as_bytes()), Err(ModelError::Parse { line: 6, .. })));
    }
}
