//! Synthetic and on-disk datasets.

mod images;
mod swiss_roll;

pub use images::{load_gray_image, load_image_dataset, to_gray, LabeledImageSet, Layout, LUMA, UIUC_HEIGHT, UIUC_WIDTH};
pub use swiss_roll::{swiss_roll, unrolled_coordinates, SwissRollSpec, HEIGHT, T_MAX, T_MIN};
