from .greedy import Greedy
from .poly import Poly
