import pytest

from charterdate import kernels
from charterdate.corpus import Corpus, Document

FINAL_CONCORD = (
    "Haec est finalis concordia facta in curia domini regis apud Westmonasterium a die S Johannis "
    "Baptistae in !xv! dies anno regni regis Henrici filii regis Johannis !xxi! coram Roberto de "
    "Lexinton Willelmo de Eboraco Ada filio Willelmi Willelmo de Culewurth justitiariis et aliis "
    "domini regis fidelibus tunc ibi praesentibus inter Johannem Baioc quaerentem et Robertum Sarum "
    "episcopum et capitulum deforciantes per Radulfum de Haghe positum loco ipsorum ad lucrandum vel "
    "perdendum de advocatione ecclesiae de Waye Bayouse unde assisa ultimae praesentationis summonita "
    "fuit inter eos in eadem curia scilicet quod praedictus T recognovit advocationem praedictae "
    "ecclesiae cum pertinentiis esse jus ipsorum episcopi et capituli et ecclesiae suae Sarum ut illam "
    "quam idem episcopus et capitulum Sarum habent de dono Alani de Baiocis patris praedicti Johannis "
    "cujus haeres ipse est et idem episcopus et capitulum praedictum concesserunt pro se ob "
    "successoribus suis eidem Johanni ut eidem ecclesiae quotiescunque tota vita ipsius eam vacare "
    "contigerit possit idoneam personam praesentare ita quod quicumque pro tempore fuerit persona "
    "ejusdem ecclesiae ad praesentationem ipsius Johannis reddet singulis annis praedictis episcopo et "
    "capitulo sex marcas argenti de praedicta ecclesia apud Sarum nomine pensionis scilicet ad festum S "
    "Michaelis !xx! solidos ad Natale Domini !xx! solidos ad Pascha !xx! solidos ad nativitatem beati "
    "Johannis Baptistae !xx! solidos"
)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Run the test once per available kernel backend."""
    previous = kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)


def make_corpus(spec):
    """``spec`` is a list of (id, text, date) triples."""
    return Corpus(Document(i, tuple(text.split()), date) for i, text, date in spec)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[num])
