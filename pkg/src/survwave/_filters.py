"""Low-pass filter tables for the supported orthonormal scaling functions.

Coefficients are ``h_0 .. h_{L-1}`` normalised so that ``sum(h) == sqrt(2)``.
Daubechies entries are extremal phase, symmlets least asymmetric.
"""

FILTER_TABLE = {
    "haar": (
        0.7071067811865476,
        0.7071067811865476,
    ),
    "daubechies2": (
        0.48296291314453416,
        0.8365163037378079,
        0.2241438680420134,
        -0.12940952255126037,
    ),
    "daubechies3": (
        0.33267055295008263,
        0.8068915093110925,
        0.45987750211849154,
        -0.13501102001025458,
        -0.08544127388202666,
        0.03522629188570953,
    ),
    "daubechies4": (
        0.2303778133088965,
        0.7148465705529157,
        0.6308807679298589,
        -0.027983769416859854,
        -0.18703481171909309,
        0.030841381835560764,
        0.0328830116668852,
        -0.010597401785069032,
    ),
    "daubechies5": (
        0.16010239797419293,
        0.6038292697971896,
        0.7243085284377729,
        0.13842814590132074,
        -0.24229488706638203,
        -0.032244869584638375,
        0.07757149384004572,
        -0.006241490212798274,
        -0.012580751999081999,
        0.0033357252854737712,
    ),
    "daubechies6": (
        0.11154074335010947,
        0.49462389039845306,
        0.7511339080210954,
        0.31525035170919763,
        -0.22626469396543983,
        -0.12976686756726194,
        0.09750160558732304,
        0.027522865530305727,
        -0.03158203931748603,
        0.0005538422011614961,
        0.004777257510945511,
        -0.0010773010853084796,
    ),
    "daubechies7": (
        0.07785205408500918,
        0.3965393194819173,
        0.7291320908462351,
        0.4697822874051931,
        -0.14390600392856498,
        -0.22403618499387498,
        0.07130921926683026,
        0.08061260915108308,
        -0.03802993693501441,
        -0.01657454163066688,
        0.01255099855609984,
        0.0004295779729213665,
        -0.0018016407040474908,
        0.00035371379997452024,
    ),
    "daubechies8": (
        0.05441584224310401,
        0.31287159091429995,
        0.6756307362972898,
        0.5853546836542067,
        -0.015829105256349306,
        -0.2840155429615469,
        0.00047248457391328274,
        0.12874742662047847,
        -0.017369301001807547,
        -0.044088253930794755,
        0.013981027917398282,
        0.008746094047405777,
        -0.004870352993451574,
        -0.00039174037337694705,
        0.0006754494064505693,
        -0.00011747678412476953,
    ),
    "daubechies9": (
        0.038077947363878345,
        0.24383467461259034,
        0.6048231236901112,
        0.6572880780513005,
        0.13319738582500756,
        -0.2932737832791749,
        -0.09684078322297646,
        0.14854074933810638,
        0.03072568147933338,
        -0.06763282906132997,
        0.00025094711483145197,
        0.022361662123679096,
        -0.004723204757751397,
        -0.00428150368246343,
        0.0018476468830562265,
        0.00023038576352319597,
        -0.0002519631889427101,
        3.93473203162716e-05,
    ),
    "daubechies10": (
        0.026670057900555554,
        0.1881768000776915,
        0.5272011889317256,
        0.6884590394536035,
        0.2811723436605775,
        -0.24984642432731538,
        -0.19594627437737705,
        0.12736934033579325,
        0.09305736460357235,
        -0.07139414716639708,
        -0.029457536821875813,
        0.033212674059341,
        0.0036065535669561697,
        -0.010733175483330575,
        0.001395351747052901,
        0.001992405295185056,
        -0.0006858566949597116,
        -0.00011646685512928545,
        9.358867032006959e-05,
        -1.3264202894521244e-05,
    ),
    "symmlet4": (
        0.03222310060405212,
        -0.012603967262032107,
        -0.09921954357663255,
        0.29785779560530856,
        0.8037387518051324,
        0.49761866763277296,
        -0.029635527646003884,
        -0.07576571478950246,
    ),
    "symmlet5": (
        0.01953888273525205,
        -0.02110183402469275,
        -0.17532808990806,
        0.016602105764511054,
        0.6339789634567929,
        0.7234076904040391,
        0.1993975339768555,
        -0.03913424930231075,
        0.029519490925708682,
        0.02733306834499932,
    ),
    "symmlet6": (
        -0.007800708325030563,
        0.0017677118642517758,
        0.04472490177078272,
        -0.021060292512366213,
        -0.07263752278638426,
        0.3379294217281464,
        0.787641141028648,
        0.49105594192799185,
        -0.04831174258568538,
        -0.11799011114852147,
        0.003490712084218349,
        0.015404109327043856,
    ),
    "symmlet7": (
        0.01026817670846786,
        0.004010244871521074,
        -0.10780823770329652,
        -0.14004724044294853,
        0.2886296317506324,
        0.7677643170048787,
        0.5361019170905782,
        0.017441255086849683,
        -0.049552834937032435,
        0.06789269350122468,
        0.03051551316587867,
        -0.012636303403239972,
        -0.0010473848886791489,
        0.0026818145682603167,
    ),
    "symmlet8": (
        0.0018899503327691333,
        -0.0003029205147259922,
        -0.014952258337061597,
        0.003808752013899459,
        0.04913717967372704,
        -0.027219029917113172,
        -0.051945838107860534,
        0.3644418948362278,
        0.7771857516996348,
        0.4813596512590049,
        -0.061273359067845735,
        -0.14329423835126645,
        0.007607487324988558,
        0.03169508781152581,
        -0.0005421323318030509,
        -0.0033824159510057964,
    ),
    "coiflet1": (
        -0.07273261951252645,
        0.3378976624574818,
        0.8525720202116004,
        0.3848648468648578,
        -0.07273261951252645,
        -0.015655728135791993,
    ),
    "coiflet2": (
        0.01638733646320364,
        -0.04146493678687178,
        -0.0673725547237256,
        0.3861100668227629,
        0.8127236354494135,
        0.4170051844232391,
        -0.07648859907828076,
        -0.05943441864643109,
        0.02368017194684777,
        0.005611434819368834,
        -0.0018232088709110323,
        -0.000720549445520347,
    ),
    "coiflet3": (
        -0.003793512864380802,
        0.007782596425672746,
        0.023452696142077168,
        -0.06577191128146936,
        -0.06112339000297255,
        0.40517690240911824,
        0.7937772226260872,
        0.42848347637737,
        -0.07179982161915484,
        -0.08230192710629983,
        0.03455502757329774,
        0.015880544863669452,
        -0.009007976136730624,
        -0.0025745176881367972,
        0.0011175187708306303,
        0.0004662169598204029,
        -7.0983302506379e-05,
        -3.459977319727278e-05,
    ),
}
