//! Write an offline dataset to CSV and read it back.

use bdi::tasks::{generate_offline, read_csv, write_csv, DatasetRecords, Task, TaskKind, TaskSpec};

fn main() -> bdi::Result<()> {
    let task = Task::new(TaskSpec::new(TaskKind::NegStyblinskiTang, Some(4), 2))?;
    let data = generate_offline(&task, 40, 0.5)?;
    let records = DatasetRecords::from(&data);

    let mut buf = Vec::new();
    write_csv(&records, &mut buf)?;
    let text = String::from_utf8_lossy(&buf);
    for line in text.lines().take(3) {
        println!("{line}");
    }

    let back = read_csv(buf.as_slice())?;
    let exact = back
        .designs
        .iter()
        .zip(records.designs.iter())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!("{} rows, bit-exact round trip: {exact}", back.raw.len());
    Ok(())
}
