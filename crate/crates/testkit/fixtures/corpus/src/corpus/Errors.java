package corpus;

public class Errors {
    static class AppException extends Exception {
        final int code;

        AppException(String msg, int code) {
            super(msg);
            this.code = code;
        }
    }

    static class NotFound extends AppException {
        NotFound(String what) {
            super("not found: " + what, 404);
        }
    }

    static class Forbidden extends AppException {
        Forbidden() {
            super("forbidden", 403);
        }
    }

    static String fetch(String key) throws AppException {
        if (key == null) throw new Forbidden();
        if (key.length() == 0) throw new NotFound("<empty>");
        return key.toUpperCase();
    }

    static int status(String key) {
        try {
            fetch(key);
            return 200;
        } catch (NotFound e) {
            return e.code;
        } catch (AppException e) {
            return e.code + 1000;
        }
    }

    static int nested(int[] xs, int i) {
        int r = 0;
        try {
            try {
                r = xs[i];
            } catch (ArrayIndexOutOfBoundsException e) {
                r = -1;
                throw new RuntimeException(e);
            } finally {
                r += 100;
            }
        } catch (RuntimeException e) {
            r += 1000;
        }
        return r;
    }

    static void require(boolean cond, String what) {
        if (!cond) {
            throw new IllegalArgumentException(what);
        }
    }
}
