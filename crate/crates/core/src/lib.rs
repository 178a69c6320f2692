pub mod exact;
pub mod io;
pub mod polymology;
pub mod score;
pub mod toric;
