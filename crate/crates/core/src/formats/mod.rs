//! On-disk exchange formats.
//!
//! | data          | format                                                      |
//! |---------------|-------------------------------------------------------------|
//! | centroids     | UTF-8 CSV, header `x,y`, one point per line, LF endings     |
//! | polygons      | JSON array of polygons, each an array of `[x, y]` pairs     |
//! | density maps  | PFM grayscale (`Pf`), scale `-1.0`, little-endian, bottom-up |
//! | label masks   | binary PGM (`P5`), maxval 65535, big-endian samples          |

mod centroids;
mod netpbm;
mod polygons;

pub use centroids::{read_centroids, read_centroids_file, write_centroids, write_centroids_file};
pub use netpbm::{
    read_label_mask, read_label_mask_file, read_pfm, read_pfm_file, write_label_mask, write_label_mask_file,
    write_pfm, write_pfm_file,
};
pub use polygons::{read_polygons, read_polygons_file, write_polygons};
