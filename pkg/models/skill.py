"""
Skill model for the planning service.

A row stores the demonstration document a skill was registered from plus
the parameters used, so the segmented path and guiding poses can be
rebuilt deterministically when the library is loaded.
"""
import json
from datetime import datetime

from models import db


class Skill(db.Model):
    """
    Persisted skill library entry.

    Attributes:
        id (int): Primary key
        label (str): Unique task label
        demonstration (str): Demonstration document, JSON text
        roi_radius (float): ROI radius used for extraction, meters
        tol_rot (float): Segmentation rotation tolerance, radians
        tol_trans (float): Segmentation translation tolerance, meters
        segment_count (int): Number of constant-screw segments found
        guiding_pose_count (int): Number of guiding poses retained
        created_at (datetime): When the skill was first registered
        updated_at (datetime): When it was last overwritten
    """

    __tablename__ = 'skill'

    id = db.Column(db.Integer, primary_key=True)
    label = db.Column(db.String(100), unique=True, nullable=False)
    demonstration = db.Column(db.Text, nullable=False)

    roi_radius = db.Column(db.Float, nullable=False)
    tol_rot = db.Column(db.Float, nullable=False)
    tol_trans = db.Column(db.Float, nullable=False)

    segment_count = db.Column(db.Integer, nullable=False)
    guiding_pose_count = db.Column(db.Integer, nullable=False)

    created_at = db.Column(db.DateTime, default=datetime.utcnow)
    updated_at = db.Column(db.DateTime, default=datetime.utcnow, onupdate=datetime.utcnow)

    def __repr__(self):
        return f'<Skill {self.id}: {self.label}>'

    @property
    def demonstration_doc(self) -> dict:
        return json.loads(self.demonstration)

    def to_dict(self, include_demonstration=False):
        """
        Convert the skill row to a dictionary for JSON serialization.

        Args:
            include_demonstration (bool): Include the stored demonstration document

        Returns:
            dict: Skill data
        """
        data = {
            'id': self.id,
            'label': self.label,
            'roi_radius': self.roi_radius,
            'tol_rot': self.tol_rot,
            'tol_trans': self.tol_trans,
            'segment_count': self.segment_count,
            'guiding_pose_count': self.guiding_pose_count,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'updated_at': self.updated_at.isoformat() if self.updated_at else None,
        }
        if include_demonstration:
            data['demonstration'] = self.demonstration_doc
        return data
