import factory
from faker import Faker

from decolab.modes import DecayMode, ModeCatalogue
from decolab.poles import FormFactor

faker = Faker()


class DecayModeFactory(factory.Factory):
    amplitude_0 = factory.LazyAttribute(lambda _: faker.random.uniform(0.05, 5.0))
    rate = factory.LazyAttribute(lambda _: faker.random.uniform(0.01, 10.0))
    frequency = 0.0
    phase = 0.0

    class Meta:
        model = DecayMode


class ModeCatalogueFactory(factory.Factory):
    modes = factory.LazyAttribute(
        lambda _: tuple(DecayModeFactory.build_batch(faker.random_int(1, 8)))
    )
    equilibrium_value = 0.0
    hbar = 1.0

    class Meta:
        model = ModeCatalogue


class FormFactorFactory(factory.Factory):
    kind = factory.LazyAttribute(
        lambda _: faker.random_element(("flat_band", "gaussian", "lorentzian"))
    )
    strength = factory.LazyAttribute(lambda _: faker.random.uniform(0.01, 0.2))
    support = (0.0, 10.0)

    class Meta:
        model = FormFactor
