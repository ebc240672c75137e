"""
Formulario de configuración de corridas

Valida las opciones de los comandos run, gradcheck y compare antes de
construir el RunConfig.
"""

from pathlib import Path

from django import forms
from django.core.exceptions import ValidationError

METODO_CHOICES = [
    ('dd', 'Dinámica desacoplada'),
    ('cd', 'Dinámica acoplada'),
    ('nocoding', 'Sin codificación'),
    ('oracle', 'Óptimo exacto'),
    ('all', 'Todos los métodos'),
]


class RunConfigForm(forms.Form):
    """
    Opciones de una corrida. Los parámetros numéricos son opcionales:
    los ausentes se toman del escenario o de los ajustes.
    """
    method = forms.ChoiceField(choices=METODO_CHOICES, required=False)
    scenario = forms.CharField(required=False)
    seed = forms.IntegerField(required=False)
    r = forms.FloatField(required=False)
    floor = forms.FloatField(required=False)
    kappa = forms.FloatField(required=False)
    eta = forms.FloatField(required=False)
    step = forms.FloatField(required=False)
    n_small = forms.IntegerField(required=False)
    n_large = forms.IntegerField(required=False)
    tol = forms.FloatField(required=False)
    backtracking = forms.NullBooleanField(required=False)
    initial_state = forms.CharField(required=False)
    out = forms.CharField(required=False)

    def clean_r(self):
        r = self.cleaned_data.get('r')
        if r is not None and not r < 0:
            raise ValidationError('El exponente r debe ser negativo.')
        return r

    def _positivo(self, campo):
        valor = self.cleaned_data.get(campo)
        if valor is not None and not valor > 0:
            raise ValidationError(f'{campo} debe ser positivo.')
        return valor

    def clean_floor(self):
        return self._positivo('floor')

    def clean_kappa(self):
        return self._positivo('kappa')

    def clean_eta(self):
        return self._positivo('eta')

    def clean_step(self):
        return self._positivo('step')

    def clean_n_small(self):
        return self._positivo('n_small')

    def clean_n_large(self):
        return self._positivo('n_large')

    def clean_tol(self):
        return self._positivo('tol')

    def clean_scenario(self):
        ruta = self.cleaned_data.get('scenario')
        if ruta and not Path(ruta).is_file():
            raise ValidationError(f'No existe el archivo de escenario {ruta}.')
        return ruta

    def clean_initial_state(self):
        ruta = self.cleaned_data.get('initial_state')
        if ruta and not Path(ruta).is_file():
            raise ValidationError(f'No existe el archivo de estado inicial {ruta}.')
        return ruta

    def clean_out(self):
        """
        El directorio de salida debe poder crearse y escribirse
        """
        ruta = self.cleaned_data.get('out')
        if ruta:
            destino = Path(ruta)
            if destino.exists() and not destino.is_dir():
                raise ValidationError(f'{ruta} existe y no es un directorio.')
        return ruta

    def clean(self):
        datos = super().clean()
        if not datos.get('scenario') and datos.get('seed') is None:
            raise ValidationError('Indique --scenario o --seed.')
        return datos
