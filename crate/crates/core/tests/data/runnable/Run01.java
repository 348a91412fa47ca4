public class Run01 {
    public static void main(String[] args) {
        int acc = 0;
        for (int j = 0; j < 4; j++) {
            acc = acc + j * 3;
        }
        System.out.println(acc);
    }
}
