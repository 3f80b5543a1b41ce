use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use driftbias::Error;

/// Destination for tabular output: standard output unless `--out` is given.
pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    match out {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::Input {
                file: path.to_path_buf(),
                message: e.to_string(),
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

pub fn open(path: &Path) -> Result<File, Error> {
    File::open(path).map_err(|e| Error::Input {
        file: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Attaches the file name to reader-level errors that lack it.
pub fn in_file(path: &Path) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Csv(_) | Error::Io(_) | Error::InvalidArgument(_) => Error::Input {
            file: path.to_path_buf(),
            message: e.to_string(),
        },
        other => other,
    }
}

/// Reads one numeric column from a CSV file with a header row. Uses the
/// column named `value` when present, otherwise the first column.
pub fn read_series(path: &Path) -> Result<Vec<f64>, Error> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let parse_err = |line: u64, column: usize, message: String| Error::Parse {
        file: PathBuf::from(path),
        line,
        column,
        message,
    };
    let headers = reader.headers().map_err(|e| in_file(path)(e.into()))?.clone();
    if headers.is_empty() {
        return Err(Error::Input {
            file: path.to_path_buf(),
            message: "file is empty".into(),
        });
    }
    let column = headers.iter().position(|h| h.trim() == "value").unwrap_or(0);
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, 1, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = record
            .get(column)
            .ok_or_else(|| parse_err(line, column + 1, "missing field".into()))?;
        let value: f64 = field
            .trim()
            .parse()
            .map_err(|_| parse_err(line, column + 1, format!("{field:?} is not a number")))?;
        if !value.is_finite() {
            return Err(parse_err(line, column + 1, format!("{field:?} is not finite")));
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(Error::Input {
            file: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    Ok(values)
}
