pub mod capacity;
pub mod compare;
pub mod estimate;
pub mod sense;
pub mod toy;
