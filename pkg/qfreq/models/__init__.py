from .qpoint import *
from .curve import *
from .profile import *
from .singular import *
from .covering import *
from .mesh import *
from .run import *
