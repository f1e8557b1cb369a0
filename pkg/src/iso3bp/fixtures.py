"""Named points and periodic-orbit tables, stored with their printed digits."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .boundary import BranchKind

# seed of the odd/even curve, as exact rationals (tau, a, b)
P0 = (
    Fraction(13366894627923, 5000000000000),
    Fraction(43170475352787, 10000000000000),
    Fraction(1490359743, 1000000000),
)

# worked example of one continuation segment from P0 (tau coordinates)
Q200 = ("2.7219062659312807", "4.212655007080421", "1.6538674269975053")
Q1 = ("2.72191575576588", "4.212633490447383", "1.6538497779324066")

# full-period coordinates (T, a, b)
NAMED_POINTS = {
    "P1": ("5.0063", "0.109392", "1.16473"),
    "P2": ("12.7012", "0.0437163", "3.19541"),
    "P3": ("9.9472", "4.73605", "0.2"),
    "B": ("14.607249047056753", "2.081806260749908", "3.194934273913219"),
}

P2_MIN_R = "0.0547972"
P2_MAX_F = "6.01695"
P1_MIN_R = "0.0369262"
P1_MAX_F = "1.52497"


@dataclass(frozen=True)
class TableRow:
    table: str
    index: int
    T: str
    a: str
    b: str
    p: int
    q: int
    location: tuple
    kind: BranchKind
    advisory: bool = False

    @property
    def coords(self):
        return float(self.T), float(self.a), float(self.b)

    @property
    def theta_over_pi(self):
        return Fraction(self.p, self.q)

    @property
    def label(self):
        return f"{self.table}[{self.location[0]},{self.location[1]}]"


_RAW = {
    "fig1": (BranchKind.ODD, [
        ("7.464725167070125", "1.332130235206886", "2.39131806234605", 14, 9),
        ("6.692611549615348", "1.1189865713077587", "2.178542324667063", 11, 7),
        ("6.156645197408822", "0.9203809141218081", "1.9818897189116862", 8, 5),
        ("5.758992220584509", "0.72863210825991", "1.791870916952545", 13, 8),
        ("5.454531817007846", "0.5397530375918577", "1.6029431700479464", 5, 3),
        ("5.32949878269853", "0.4457220498597047", "1.5077112808284203", 12, 7),
        ("5.220379172126002", "0.35201283725645105", "1.411839280497764", 7, 4),
        ("5.1264630045948305", "0.25902392732426605", "1.3159094056731593", 16, 9),
        ("5.096931182326409", "0.22679159236240487", "1.2822928944673215", 9, 5),
    ]),
    "f9": (BranchKind.ODD_EVEN, [
        ("10.694782129146047", "4.3162773916465715", "1.4916623030663265", 17, 8),
        ("10.900907564917922", "4.205530359018152", "1.6642665366638942", 15, 7),
        ("11.251546754899636", "4.020933846016405", "1.9098147447184282", 13, 6),
        ("11.546587626864484", "3.8684643701482133", "2.0840362602898437", 11, 5),
        ("12.005866456188725", "3.6348152391561275", "2.314439960284758", 9, 4),
        ("12.482298481771874", "3.3941653076488447", "2.5161535540867117", 16, 7),
        ("12.805950195048542", "3.229502929775678", "2.6373059506494907", 7, 3),
        ("13.037980888481863", "3.10968118474065", "2.717938296845948", 12, 5),
        ("13.211458502729283", "3.01851140163578", "2.775360523910528", 17, 7),
    ]),
    "fs9": (BranchKind.ODD_EVEN, [
        ("13.451787406253272", "2.8889144618608733", "2.8514754095228265", 11, 6),
        ("13.60916416956247", "2.8011806024112604", "2.8994928664781003", 13, 7),
        ("13.719567754906889", "2.737827736709047", "2.9324647582021814", 15, 8),
        ("13.801004797570164", "2.689923890770301", "2.9564685196206826", 17, 9),
        ("14.320649658996734", "2.344448198979306", "3.106748248260848", 2, 1),
        ("14.657003574778068", "2.0202122629047206", "3.212388918731313", 17, 8),
        ("14.686554119081652", "1.9783743950165875", "3.2235432541405697", 15, 7),
        ("14.719531067694582", "1.9241180805387452", "3.2371600512994565", 13, 6),
        ("14.754026030069339", "1.8509347720107878", "3.254002265714927", 11, 5),
    ]),
    "t9": (BranchKind.ODD_EVEN, [
        ("14.782277611145048", "1.7467887078517095", "3.274928737204819", 9, 4),
        ("14.786834114569135", "1.6762115129006632", "3.287061516889608", 16, 7),
        ("14.774959957278682", "1.5866395627104857", "3.300053407198923", 7, 3),
        ("14.7286222583901", "1.4691728012133716", "3.3129725743424996", 12, 5),
        ("14.699688133885457", "1.4214348721248662", "3.316877441047812", 17, 7),
        ("14.60791563192398", "1.3083245035642173", "3.3230110738911285", 5, 2),
        ("14.4942511626078", "1.2033604318255704", "3.324782465355579", 18, 7),
        ("14.444161869664121", "1.163467447374621", "3.3244726259938155", 13, 5),
        ("14.319901500300364", "1.0746785092812807", "3.321867812104126", 8, 3),
    ]),
    "fth9": (BranchKind.ODD_EVEN, [
        ("14.155328130457113", "0.9714850334241202", "3.3156069432644326", 11, 4),
        ("14.054387879818348", "0.9133674393862702", "3.310617589529648", 14, 5),
        ("13.986985590840762", "0.8760917450402825", "3.306890869738851", 17, 6),
        ("13.659851940872658", "0.70551977441241", "3.285155344523193", 3, 1),
        ("13.315322141213205", "0.5298843477532729", "3.2569218042195365", 16, 5),
        ("13.240214962690887", "0.4900089555434633", "3.250127637396059", 13, 4),
        ("13.125795380869723", "0.4265448292958072", "3.239357536186598", 10, 3),
        ("13.0441592363555", "0.3781732129466524", "3.23136706052875", 17, 5),
        # printed as 7 pi / 4; its neighbours suggest a misprint
        ("12.938357527438528", "0.30903261362830825", "3.2206342443812517", 7, 4),
    ]),
}


def _build():
    rows = []
    for table, (kind, entries) in _RAW.items():
        for i, (T, a, b, p, q) in enumerate(entries):
            advisory = table == "fth9" and i == 8
            rows.append(TableRow(table, i, T, a, b, p, q, (i // 3 + 1, i % 3 + 1),
                                 kind, advisory))
    return tuple(rows)


TABLE_ROWS = _build()


def named_point(name):
    return tuple(float(v) for v in NAMED_POINTS[name])


def p0():
    return tuple(float(v) for v in P0)
