//! The unit of annotation: one UI element with its type, box, and text.

use alloc::string::String;

use crate::geometry::BBox;

/// One screen element in the `(type, coordinates, description)` triple form.
///
/// `epsilon` optionally overrides the global perturbation range for this
/// element during augmentation; datasets that know the element's padding can
/// carry it per element.
#[derive(Clone, Debug, PartialEq)]
pub struct UIElement {
    pub element_type: String,
    pub bbox: BBox,
    pub description: String,
    pub epsilon: Option<f64>,
}

impl UIElement {
    pub fn new(element_type: impl Into<String>, bbox: BBox, description: impl Into<String>) -> Self {
        Self {
            element_type: element_type.into(),
            bbox,
            description: description.into(),
            epsilon: None,
        }
    }
}
