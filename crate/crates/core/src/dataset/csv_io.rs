use std::collections::BTreeMap;
use std::path::Path;

use csv::StringRecord;

use super::quantize::{bin_labels, quantize_numeric, Bins};
use super::{AttributeKind, AttributeSchema, CategoricalDataset, DatasetError};

#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    pub label_column: String,
    /// Columns to quantize, with their bin count. Everything else is read
    /// as categorical.
    pub numeric_bins: BTreeMap<String, Bins>,
    /// Keep empty cells as an explicit `""` category instead of rejecting
    /// the row.
    pub missing_as_category: bool,
}

impl LoadOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
            ..Default::default()
        }
    }

    pub fn bins(mut self, column: impl Into<String>, bins: Bins) -> Self {
        self.numeric_bins.insert(column.into(), bins);
        self
    }
}

struct Table {
    header: StringRecord,
    records: Vec<StringRecord>,
    /// Source line of each record, for error messages.
    lines: Vec<usize>,
}

fn read_table(path: &Path) -> Result<Table, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let header = reader.headers()?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(DatasetError::Empty);
    }
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record?;
        lines.push(record.position().map_or(0, |p| p.line() as usize));
        records.push(record);
    }
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(Table {
        header,
        records,
        lines,
    })
}

fn column_index(header: &StringRecord, name: &str) -> Option<usize> {
    header.iter().position(|h| h == name)
}

/// Reads a CSV file with a mandatory header row into a categorical dataset.
pub fn load_csv(
    path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<CategoricalDataset, DatasetError> {
    let table = read_table(path.as_ref())?;
    let label_idx = column_index(&table.header, &options.label_column)
        .ok_or_else(|| DatasetError::MissingLabelColumn(options.label_column.clone()))?;
    for column in options.numeric_bins.keys() {
        if column_index(&table.header, column).is_none() {
            return Err(DatasetError::MissingColumn(column.clone()));
        }
    }
    let attribute_cols: Vec<usize> = (0..table.header.len())
        .filter(|&c| c != label_idx)
        .collect();
    if attribute_cols.is_empty() {
        return Err(DatasetError::NoAttributes);
    }

    for (record, &line) in table.records.iter().zip(&table.lines) {
        for (c, cell) in record.iter().enumerate() {
            if cell.is_empty() && (c == label_idx || !options.missing_as_category) {
                return Err(DatasetError::MissingCell {
                    row: line,
                    column: table.header[c].to_string(),
                });
            }
        }
    }

    let n = table.records.len();
    let p = attribute_cols.len();
    let mut x = vec![0u32; n * p];
    let mut schemas = Vec::with_capacity(p);
    for (j, &c) in attribute_cols.iter().enumerate() {
        let name = &table.header[c];
        let schema = match options.numeric_bins.get(name) {
            Some(&bins) => encode_numeric(&table, c, bins, &mut x, j, p)?,
            None => encode_categorical(&table, c, &mut x, j, p),
        };
        if schema.categories.len() < 2 {
            return Err(DatasetError::TooFewDistinct {
                column: name.to_string(),
                distinct: schema.categories.len(),
                needed: 2,
            });
        }
        schemas.push(schema);
    }

    let mut label_names: Vec<String> = Vec::new();
    let mut y = Vec::with_capacity(n);
    for record in &table.records {
        let cell = &record[label_idx];
        let k = match label_names.iter().position(|l| l == cell) {
            Some(k) => k,
            None => {
                label_names.push(cell.to_string());
                label_names.len() - 1
            }
        };
        y.push(k as u32);
    }
    if label_names.len() < 2 {
        return Err(DatasetError::TooFewLabels(label_names.len()));
    }
    CategoricalDataset::new(schemas, options.label_column.clone(), label_names, x, y)
}

fn encode_categorical(
    table: &Table,
    c: usize,
    x: &mut [u32],
    j: usize,
    p: usize,
) -> AttributeSchema {
    let mut categories: Vec<String> = Vec::new();
    for (i, record) in table.records.iter().enumerate() {
        let cell = &record[c];
        let k = match categories.iter().position(|v| v == cell) {
            Some(k) => k,
            None => {
                categories.push(cell.to_string());
                categories.len() - 1
            }
        };
        x[i * p + j] = k as u32;
    }
    AttributeSchema {
        name: table.header[c].to_string(),
        categories,
        kind: AttributeKind::Categorical,
    }
}

fn encode_numeric(
    table: &Table,
    c: usize,
    bins: Bins,
    x: &mut [u32],
    j: usize,
    p: usize,
) -> Result<AttributeSchema, DatasetError> {
    let name = table.header[c].to_string();
    let mut present = Vec::new();
    let mut values = Vec::new();
    for (i, (record, &line)) in table.records.iter().zip(&table.lines).enumerate() {
        let cell = &record[c];
        if cell.is_empty() {
            continue;
        }
        let v: f64 = cell.trim().parse().map_err(|_| DatasetError::NotNumeric {
            row: line,
            column: name.clone(),
            value: cell.to_string(),
        })?;
        present.push(i);
        values.push(v);
    }
    let quantized = quantize_numeric(&values, bins).map_err(|e| match e {
        DatasetError::TooFewDistinct {
            distinct, needed, ..
        } => DatasetError::TooFewDistinct {
            column: name.clone(),
            distinct,
            needed,
        },
        other => other,
    })?;
    let mut categories = bin_labels(&quantized.edges);
    let missing_index = categories.len() as u32;
    for i in 0..table.records.len() {
        x[i * p + j] = missing_index;
    }
    for (&i, &k) in present.iter().zip(&quantized.indices) {
        x[i * p + j] = k;
    }
    if present.len() < table.records.len() {
        categories.push(String::new());
    }
    Ok(AttributeSchema {
        name,
        categories,
        kind: AttributeKind::QuantizedNumeric {
            edges: quantized.edges,
        },
    })
}

/// Encodes a CSV file against an existing schema (for example the one stored
/// in a model). Unknown categories are a data error.
pub fn load_csv_with_schema(
    path: impl AsRef<Path>,
    schemas: &[AttributeSchema],
    label_column: &str,
    label_names: &[String],
    missing_as_category: bool,
) -> Result<CategoricalDataset, DatasetError> {
    let table = read_table(path.as_ref())?;
    let label_idx = column_index(&table.header, label_column)
        .ok_or_else(|| DatasetError::MissingLabelColumn(label_column.to_string()))?;
    let x = encode_rows(&table, schemas, missing_as_category)?;
    let mut y = Vec::with_capacity(table.records.len());
    for (record, &line) in table.records.iter().zip(&table.lines) {
        let cell = &record[label_idx];
        let k = label_names.iter().position(|l| l == cell).ok_or_else(|| {
            DatasetError::UnknownCategory {
                row: line,
                column: label_column.to_string(),
                value: cell.to_string(),
            }
        })?;
        y.push(k as u32);
    }
    CategoricalDataset::new(
        schemas.to_vec(),
        label_column,
        label_names.to_vec(),
        x.concat(),
        y,
    )
}

/// Encodes the attribute columns of a CSV file (a label column, if present,
/// is ignored). Returns one row of category indices per record.
pub fn load_features_with_schema(
    path: impl AsRef<Path>,
    schemas: &[AttributeSchema],
    missing_as_category: bool,
) -> Result<Vec<Vec<u32>>, DatasetError> {
    let table = read_table(path.as_ref())?;
    encode_rows(&table, schemas, missing_as_category)
}

fn encode_rows(
    table: &Table,
    schemas: &[AttributeSchema],
    missing_as_category: bool,
) -> Result<Vec<Vec<u32>>, DatasetError> {
    let cols: Vec<usize> = schemas
        .iter()
        .map(|s| {
            column_index(&table.header, &s.name)
                .ok_or_else(|| DatasetError::MissingColumn(s.name.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(table.records.len());
    for (record, &line) in table.records.iter().zip(&table.lines) {
        let mut row = Vec::with_capacity(schemas.len());
        for (schema, &c) in schemas.iter().zip(&cols) {
            let cell = &record[c];
            if cell.is_empty() && !missing_as_category {
                return Err(DatasetError::MissingCell {
                    row: line,
                    column: schema.name.clone(),
                });
            }
            let k = encode_cell(schema, cell).ok_or_else(|| DatasetError::UnknownCategory {
                row: line,
                column: schema.name.clone(),
                value: cell.to_string(),
            })?;
            row.push(k as u32);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn encode_cell(schema: &AttributeSchema, cell: &str) -> Option<usize> {
    if cell.is_empty() {
        return schema.category_index("");
    }
    schema.encode(cell)
}

/// Writes category labels back out as CSV, label column last.
pub fn write_csv(dataset: &CategoricalDataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<&str> = dataset.schemas().iter().map(|s| s.name.as_str()).collect();
    header.push(dataset.label_column());
    writer.write_record(&header)?;
    for (i, row) in dataset.rows().enumerate() {
        let mut record: Vec<&str> = row
            .iter()
            .zip(dataset.schemas())
            .map(|(&v, s)| s.categories[v as usize].as_str())
            .collect();
        record.push(&dataset.label_names()[dataset.labels()[i] as usize]);
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|source| DatasetError::Io {
        path: path.as_ref().display().to_string(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file
    }

    #[test]
    fn binary_identity_case() {
        let f = write_temp("a,y\nx,0\nz,1\nx,0\nz,1\n");
        let ds = load_csv(f.path(), &LoadOptions::new("y")).unwrap();
        assert_eq!(ds.n_rows(), 4);
        assert_eq!(ds.n_attributes(), 1);
        assert_eq!(ds.schemas()[0].categories, vec!["x", "z"]);
        assert_eq!(ds.n_labels(), 2);
    }

    #[test]
    fn label_only_file_has_no_attributes() {
        let f = write_temp("y\n0\n1\n");
        assert!(matches!(
            load_csv(f.path(), &LoadOptions::new("y")),
            Err(DatasetError::NoAttributes)
        ));
    }

    #[test]
    fn missing_label_column() {
        let f = write_temp("a,b\n1,2\n3,4\n");
        assert!(matches!(
            load_csv(f.path(), &LoadOptions::new("y")),
            Err(DatasetError::MissingLabelColumn(_))
        ));
    }

    #[test]
    fn empty_file() {
        let f = write_temp("");
        assert!(matches!(
            load_csv(f.path(), &LoadOptions::new("y")),
            Err(DatasetError::Empty)
        ));
        let f = write_temp("a,y\n");
        assert!(matches!(
            load_csv(f.path(), &LoadOptions::new("y")),
            Err(DatasetError::Empty)
        ));
    }

    #[test]
    fn empty_cell_rejected_with_line_number() {
        let f = write_temp("a,b,y\nx,u,0\n,v,1\nx,v,0\n");
        match load_csv(f.path(), &LoadOptions::new("y")) {
            Err(DatasetError::MissingCell { row, column }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "a");
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut opts = LoadOptions::new("y");
        opts.missing_as_category = true;
        let ds = load_csv(f.path(), &opts).unwrap();
        assert_eq!(ds.schemas()[0].categories, vec!["x", ""]);
    }

    #[test]
    fn non_numeric_text_in_numeric_column() {
        let f = write_temp("a,y\n1,0\ntwo,1\n3,0\n");
        let opts = LoadOptions::new("y").bins("a", Bins::Two);
        assert!(matches!(
            load_csv(f.path(), &opts),
            Err(DatasetError::NotNumeric { row: 3, .. })
        ));
    }

    #[test]
    fn numeric_column_is_binned() {
        let f = write_temp("a,y\n1,0\n2,1\n3,0\n4,1\n");
        let ds = load_csv(f.path(), &LoadOptions::new("y").bins("a", Bins::Two)).unwrap();
        assert_eq!(ds.schemas()[0].categories, vec!["<=2.5", ">2.5"]);
        assert_eq!(
            (0..4).map(|i| ds.value(i, 0)).collect::<Vec<_>>(),
            vec![0, 0, 1, 1]
        );
        assert_eq!(
            ds.schemas()[0].kind,
            AttributeKind::QuantizedNumeric { edges: vec![2.5] }
        );
    }

    #[test]
    fn schema_encoding_bins_new_values() {
        let f = write_temp("a,b,y\n1,p,0\n2,q,1\n3,p,0\n4,q,1\n");
        let ds = load_csv(f.path(), &LoadOptions::new("y").bins("a", Bins::Two)).unwrap();
        let g = write_temp("b,a\nq,10\np,-3\n");
        let rows = load_features_with_schema(g.path(), ds.schemas(), false).unwrap();
        assert_eq!(rows, vec![vec![1, 1], vec![0, 0]]);
        let h = write_temp("b,a\nr,10\n");
        assert!(matches!(
            load_features_with_schema(h.path(), ds.schemas(), false),
            Err(DatasetError::UnknownCategory { .. })
        ));
    }
}
