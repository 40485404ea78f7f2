from .csv_io import export_csv
from .kitti import export_kitti, import_kitti
from .labelme import import_labelme
from .pascal_voc import import_pascal_voc

__all__ = [
    "import_kitti",
    "export_kitti",
    "import_pascal_voc",
    "import_labelme",
    "export_csv",
]
