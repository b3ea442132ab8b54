//! Writing, reading and recentring body documents.
//!
//! ```bash
//! cargo run --example body_files
//! ```

use affine_wirtinger::body::{random_body_with_shape, BodyFile};
use affine_wirtinger::experiments::{recentre_body, validate_body};
use affine_wirtinger::SphereGrid;

fn main() -> affine_wirtinger::Result<()> {
    let dir = std::env::temp_dir().join("affwirt-body-files");
    let grid = SphereGrid::sphere(16)?;
    let (body, shape) = random_body_with_shape(9, 3, 0.1, false, &grid)?;

    let sampled = dir.join("sampled.json");
    BodyFile::from_body(&body).write(&sampled)?;
    let coeffs = dir.join("coeffs.json");
    BodyFile::from_harmonics(&shape, 16).write(&coeffs)?;

    for path in [&sampled, &coeffs] {
        let doc = BodyFile::read(path)?;
        let report = validate_body(&doc, None)?;
        println!("{}: {:?}, margin {:.4}, volume {:.10}", path.display(), doc.kind, report.margin, report.volume);
    }

    // coefficient files can be resampled on a finer grid
    let fine = validate_body(&BodyFile::read(&coeffs)?, Some(32))?;
    println!("resampled at B=32: volume {:.10}", fine.volume);

    let centred = recentre_body(&BodyFile::read(&coeffs)?)?;
    println!("Steiner point after recentre: {:?}", validate_body(&centred, None)?.steiner_point);
    Ok(())
}
