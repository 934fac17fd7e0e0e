//! Convex trigonometry, isoperimetric profiles and optimal contours on the
//! Finsler Lobachevsky plane.

pub mod body;
pub mod contour;
pub mod error;
pub mod geom;
pub mod io;
pub mod oracles;
pub mod plane;
pub mod profiles;
pub mod quad;
pub mod roots;
pub mod trig;
pub mod verify;

pub use body::{ConvexBody, Extents, Face, PBall, Polygon};
pub use error::{Error, Result};
pub use geom::Vec2;
pub use trig::{Correspondence, Exactness, TrigSample, TrigTable};
pub use plane::{curve_length, green_area, HyperbolicPoint, Polyline};
pub use profiles::{IsoConfig, IsoContext, ProfilePoint, Sign};
pub use contour::{check_isoperimetric, direct_contour, solve_constants, synthesize_contour, Contour, IsoConstants, IsoReport};
