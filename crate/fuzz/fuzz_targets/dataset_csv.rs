//! CSV ingestion: any bytes that parse must yield a consistent dataset that
//! survives a write/read round trip losslessly.

#![no_main]

use std::io::Cursor;

use labeldp::dataset::{from_csv_reader, to_csv_writer};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok((parsed, layout)) = from_csv_reader(Cursor::new(data), "label") else {
        return;
    };
    assert_eq!(parsed.labels().len(), parsed.len());
    assert!(parsed.check_labels().is_ok());
    for row in &parsed.rows {
        assert_eq!(row.payload.len() + 1, layout.header.len());
    }

    let mut buf = Vec::new();
    to_csv_writer(&mut buf, &layout, &parsed, None).unwrap();
    let (back, layout2) = from_csv_reader(Cursor::new(buf.as_slice()), "label").unwrap();
    assert_eq!(layout2.label_index, layout.label_index);
    assert_eq!(back.len(), parsed.len());
    for (a, b) in back.rows.iter().zip(&parsed.rows) {
        assert_eq!(a.label.to_bits(), b.label.to_bits());
        assert_eq!(a.payload, b.payload);
    }
});
