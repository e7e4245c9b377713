pub mod construct;
pub mod covering;
pub mod dimension;
pub mod faithfulness;
pub mod gale;
pub mod numeric;
pub mod representation;
pub mod sampling;
